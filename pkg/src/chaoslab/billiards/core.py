"""User-facing billiard operations built on the collision kernels."""
from dataclasses import dataclass

import numpy as np

from .. import rng
from .._jit import USE_JIT
from ..errors import (
    CornerError,
    CuspDepthError,
    DomainError,
    GrazingError,
    LostOrbitError,
)
from ..parallel import map_ordered
from . import dynamics as dyn

HALF_PI = 0.5 * np.pi
_ERRORS = {
    dyn.GRAZING: GrazingError,
    dyn.CORNER: CornerError,
    dyn.LOST: LostOrbitError,
    dyn.CUSP_DEPTH: CuspDepthError,
    dyn.CUSP_SERIES: CuspDepthError,
}


@dataclass(frozen=True)
class PhasePoint:
    """Collision coordinates: arclength q and angle phi from the inward normal."""

    q: float
    phi: float


@dataclass(frozen=True)
class Collision:
    piece: int
    point: tuple
    tau: float
    u: float
    residual: float


@dataclass
class Orbit:
    """Orbit of the billiard map, truncated at the first flagged collision."""

    q: np.ndarray
    phi: np.ndarray
    tau: np.ndarray
    steps: int
    status: int
    max_residual: float

    @property
    def flag(self):
        """None for a complete orbit, else the terminating error tag."""
        return None if self.status == dyn.OK else dyn.STATUS_NAMES[self.status]

    @property
    def points(self):
        return [PhasePoint(float(a), float(b)) for a, b in zip(self.q, self.phi)]


def max_flight(table):
    """Longest admissible chord: ten times the bounding-box diagonal."""
    pts = np.array([p.frame(u)[:2] for p in table.pieces
                    for u in np.linspace(0.0, p.length, 33)])
    span = pts.max(axis=0) - pts.min(axis=0)
    return 10.0 * float(np.hypot(*span))


def _raise(status, where):
    raise _ERRORS[status](f"{dyn.STATUS_NAMES[status]} at {where}")


def reflect(v, n):
    """v - 2 <n, v> n for unit v, n with <n, v> < 0."""
    v = np.asarray(v, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    if abs(np.hypot(*v) - 1.0) > 1e-12 or abs(np.hypot(*n) - 1.0) > 1e-12:
        raise DomainError("reflect expects unit vectors")
    d = float(v @ n)
    if d >= 0.0:
        raise DomainError("direction is not incoming (<n, v> >= 0)")
    if -d < dyn.GRAZING_TOL:
        raise GrazingError(f"grazing incidence, |<n, v>| = {-d:.3e}")
    return v - 2.0 * d * n


def _check_phase(table, x):
    if not (0.0 <= x.q < table.total_length):
        raise DomainError(f"q = {x.q} outside [0, {table.total_length})")
    if abs(x.phi) > HALF_PI:
        raise DomainError(f"|phi| = {abs(x.phi)} exceeds pi/2")


def next_collision(table, position, direction):
    """First boundary point hit from ``position`` along unit ``direction``."""
    x, y = map(float, position)
    vx, vy = map(float, direction)
    if abs(np.hypot(vx, vy) - 1.0) > 1e-12:
        raise DomainError("direction must be a unit vector")
    mf = max_flight(table)
    k, t, u = dyn.next_hit(table.kinds, table.params, table.lengths, x, y, vx, vy, mf)
    if k < 0 or t > mf:
        raise LostOrbitError(f"no wall within {mf:.3g} of {position} along {direction}")
    hx, hy = x + t * vx, y + t * vy
    res = dyn.piece_residual(table.kinds[k], table.params[k], hx, hy)
    if table.kinds[k] == 2:
        if hx < dyn.S_FLOOR:
            raise CuspDepthError(f"hit at s = {hx:.3e} below the cusp floor {dyn.S_FLOOR:g}")
        hy = table.params[k][1] * hx ** table.params[k][0] / table.params[k][0]
    return Collision(int(k), (hx, hy), float(t), float(u), float(res))


def billiard_map(table, x):
    """f(q, phi) = (q', phi')."""
    _check_phase(table, x)
    k, px, py, vx, vy = dyn.launch(table.kinds, table.params, table.offsets, x.q, x.phi)
    if np.cos(x.phi) < dyn.GRAZING_TOL:
        raise GrazingError("launch angle is tangent to the wall")
    st, j, u, hx, hy, wx, wy, t, r = dyn.collide(
        table.kinds, table.params, table.lengths, px, py, vx, vy, max_flight(table)
    )
    if st != dyn.OK:
        _raise(st, f"q = {x.q}, phi = {x.phi}")
    q1, phi1 = dyn.phase_of(table.kinds[j], table.params[j], table.offsets[j], u, hx, hy, wx, wy)
    return PhasePoint(float(q1) % table.total_length, float(phi1))


def billiard_orbit(table, x0, n):
    """n iterates of the billiard map; stops and flags on the first error."""
    _check_phase(table, x0)
    q, phi, tau, steps, status, worst = dyn.orbit_kernel(
        table.kinds, table.params, table.lengths, table.offsets,
        float(x0.q), float(x0.phi), int(n), max_flight(table),
    )
    return Orbit(q[: steps + 1] % table.total_length, phi[: steps + 1], tau[:steps],
                 int(steps), int(status), float(worst))


def sample_invariant(table, key, count, start=0):
    """(q, phi) arrays distributed as cos(phi) dphi dq / (2 |dQ|).

    Sample i uses the counter stream seed_split(key, start + i): q from
    counter 0 and sin(phi) from counter 1.
    """
    keys = rng.stream_keys(key, count, start)
    q = table.total_length * rng.uniform_array(keys, 0)
    phi = np.arcsin(2.0 * rng.uniform_array(keys, 1) - 1.0)
    return q, phi


# ------------------------------------------------------------------ batches


def _args(table):
    return table.kinds, table.params, table.lengths, table.offsets


def map_batch(table, q, phi):
    """Vectorised billiard map: (q1, phi1, tau, status, residual)."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if not USE_JIT and not table.has_cusp:
        return map_batch_numpy(table, q, phi)
    q1, p1, tau, st, res = dyn.map_batch_kernel(*_args(table), q, phi, max_flight(table))
    return q1 % table.total_length, p1, tau, st, res


def map_batch_numpy(table, q, phi):
    """Pure numpy billiard map for tables made of segments and arcs."""
    from .vectorized import map_batch_np

    return map_batch_np(table, q, phi, max_flight(table))


def observable_sums(table, key, count, code, n, workers=None, start=0):
    """S_n psi over ``count`` invariant starts; returns (sums, flight, status, residual)."""
    mf = max_flight(table)
    code = np.asarray(code, dtype=np.int64)

    def work(lo, hi):
        q, phi = sample_invariant(table, key, hi - lo, start + lo)
        return dyn.sums_kernel(*_args(table), q, phi, code, int(n), mf)

    return map_ordered(work, count, workers, min_chunk=16)


def free_paths(table, key, count, n, workers=None):
    """Total flight length and completed steps per invariant start."""
    mf = max_flight(table)

    def work(lo, hi):
        q, phi = sample_invariant(table, key, hi - lo, lo)
        return dyn.free_path_kernel(*_args(table), q, phi, int(n), mf)

    return map_ordered(work, count, workers, min_chunk=16)
