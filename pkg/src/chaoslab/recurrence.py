"""Returns to small holes: counting processes, hitting times and distances
to the Poisson law.

Time is rescaled by the hole measure: iterate i sits at time i * mu(hole),
and the window partition 0 = t_0 < ... < t_m = T splits [0, T) into
consecutive blocks of iterates.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import lsv_batch, rng
from .billiards import dynamics as bdyn
from .billiards.core import max_flight, sample_invariant
from .billiards.geometry import ARC, SEGMENT
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    GeometryError,
    InsufficientDataError,
)
from .parallel import map_ordered

MIN_RECORDS = 1000
TAIL_PAD = 5


# ------------------------------------------------------------------- holes


@dataclass(frozen=True)
class Hole:
    """Interval ball |x - z| < r, or the strip B_r(P) x [-pi/2, pi/2] around a
    boundary point P = (px, py) with arclength coordinate q."""

    kind: str
    center: float
    radius: float
    measure: float
    point: tuple = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (0.0 < self.measure < 1.0):
            raise DomainError(f"hole measure must lie in (0, 1), got {self.measure}")

    def contains(self, orbit):
        """Indicator of the hole along an orbit.

        Interval orbits are arrays of x; billiard orbits are (k, 2) arrays of
        collision points.
        """
        a = np.asarray(orbit, dtype=np.float64)
        if self.kind == "interval":
            return np.abs(a - self.center) < self.radius
        px, py = self.point
        return (a[..., 0] - px) ** 2 + (a[..., 1] - py) ** 2 < self.radius**2


def _interval_mass(meas, lo, hi):
    f = lambda x: float(meas.density(np.array([x]))[0])
    pts = [0.5] if lo < 0.5 < hi else None
    val, _ = integrate.quad(f, lo, hi, points=pts, limit=200, epsrel=1e-9)
    return val


def interval_ball(beta, z, r, bins=(512, 1024)):
    """Hole |x - z| < r for T_beta with its invariant measure.

    The mass is integrated from the density at two discretisation levels and
    must agree to 1%.
    """
    from .induced import induced_measure

    if not (0.0 <= z <= 1.0) or r <= 0:
        raise DomainError("interval hole needs z in [0, 1] and r > 0")
    lo, hi = max(0.0, z - r), min(1.0, z + r)
    masses = [_interval_mass(induced_measure(float(beta), b), lo, hi) for b in bins]
    drift = abs(masses[1] - masses[0]) / masses[1]
    if drift > 0.01:
        raise ConvergenceError(f"hole measure changes by {drift:.2%} under refinement")
    return Hole("interval", float(z), float(r), float(masses[1]),
                meta={"beta": float(beta), "refinement_drift": drift})


def _arc_window(radius, r):
    """Arclength of a circle of the given radius inside a disk of radius r
    centred on the circle."""
    if r >= 2.0 * radius:
        return 2.0 * np.pi * radius
    return 4.0 * radius * math.asin(r / (2.0 * radius))


def boundary_strip(table, q, r, samples=400):
    """Hole around the boundary point at arclength q.

    The disk B_r(P) must meet the boundary in a single sub-arc of one
    segment or circular arc, so its measure is that arclength over |dQ|.
    """
    if r <= 0:
        raise DomainError("hole radius must be positive")
    q = float(q) % table.total_length
    k, u = table.piece_of(q)
    piece = table.pieces[k]
    if piece.kind == SEGMENT:
        half = r
    elif piece.kind == ARC:
        half = 0.5 * _arc_window(piece.params[2], r)
    else:
        raise GeometryError("boundary holes on cusp curves are not supported")
    if piece.kind == SEGMENT or piece.params[4] < 2.0 * np.pi - 1e-12:
        if u - half <= 0.0 or u + half >= piece.length:
            raise GeometryError(f"hole at q = {q:.6f} reaches the end of piece {k}")
    x, y = table.frame(q)[:2]
    for j, other in enumerate(table.pieces):
        us = np.linspace(0.0, other.length, samples)
        pts = np.array([other.frame(v)[:2] for v in us])
        d = np.hypot(pts[:, 0] - x, pts[:, 1] - y)
        if j == k:
            off = np.abs(us - u)
            if piece.kind == ARC and piece.params[4] >= 2.0 * np.pi - 1e-12:
                off = np.minimum(off, piece.length - off)
            d = d[off > half + 1e-9]
        if d.size and np.min(d) < r:
            raise GeometryError(f"hole at q = {q:.6f} meets another part of the boundary")
    return Hole("boundary", q, float(r), 2.0 * half / table.total_length, (float(x), float(y)),
                meta={"piece": k, "table": table.preset_tag})


def random_boundary_strip(table, r, key, attempts=1000):
    """Centre drawn uniformly in arclength; redrawn until the hole is regular."""
    for a in range(attempts):
        q = table.total_length * float(rng.uniform_array([rng.derive(key, a)], 0)[0])
        try:
            hole = boundary_strip(table, q, r)
        except GeometryError:
            continue
        hole.meta["draw"] = a
        return hole
    raise GeometryError(f"no admissible hole centre of radius {r} in {attempts} draws")


def random_interval_ball(beta, r, key):
    """Centre drawn from the invariant density."""
    z = float(lsv_batch.invariant_starts(beta, key, 1)[0])
    return interval_ball(beta, z, r)


# ----------------------------------------------------------------- windows


def window_edges(T=5.0, windows=5):
    if T <= 0 or windows < 1:
        raise ConfigurationError("need T > 0 and at least one window")
    return np.linspace(0.0, float(T), int(windows) + 1)


def _check_edges(edges):
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0):
        raise ConfigurationError("window edges must increase from 0")
    return edges


def window_ends(edges, mu):
    """Index n_j = #{i >= 0 : i * mu < t_j} for each right edge t_j."""
    edges = _check_edges(edges)
    out = np.empty(edges.size - 1, dtype=np.int64)
    for j, t in enumerate(edges[1:]):
        n = int(math.ceil(t / mu))
        while n > 0 and (n - 1) * mu >= t:
            n -= 1
        while n * mu < t:
            n += 1
        out[j] = n
    return out


@dataclass(frozen=True)
class CountingRecord:
    window_edges: tuple
    counts: tuple
    normalization: float

    @property
    def total(self):
        return int(sum(self.counts))


def count_process(orbit, hole, edges):
    """Counts of hole visits per window along one stored orbit."""
    edges = _check_edges(edges)
    ends = window_ends(edges, hole.measure)
    inside = hole.contains(orbit)
    if inside.shape[0] < ends[-1]:
        raise InsufficientDataError(
            f"orbit has {inside.shape[0]} points, windows need {int(ends[-1])}"
        )
    counts, lo = [], 0
    for hi in ends:
        counts.append(int(np.count_nonzero(inside[lo:hi])))
        lo = hi
    return CountingRecord(tuple(edges), tuple(counts), hole.measure)


@dataclass(frozen=True)
class HittingTime:
    n: int
    rescaled: float
    censored: bool
    horizon: int


def first_hitting_time(orbit, hole):
    """First n >= 1 with f^n x in the hole, rescaled by the hole measure."""
    inside = hole.contains(orbit)
    hits = np.nonzero(inside[1:])[0]
    horizon = inside.shape[0] - 1
    if hits.size == 0:
        return HittingTime(horizon + 1, (horizon + 1) * hole.measure, True, horizon)
    n = int(hits[0]) + 1
    return HittingTime(n, n * hole.measure, False, horizon)


# ----------------------------------------------------------- batch sources


def interval_counts(beta, hole, edges, key, count, workers=None):
    """Window counts for ``count`` orbits of T_beta from invariant starts."""
    ends = window_ends(edges, hole.measure)

    def work(lo, hi):
        x0 = lsv_batch.invariant_starts(beta, key, hi - lo, lo)
        return lsv_batch.count_kernel(x0, float(beta), hole.center, hole.radius, ends)

    counts = map_ordered(work, count, workers)
    return counts, np.zeros(count, dtype=np.int64)


def billiard_counts(table, hole, edges, key, count, workers=None):
    """Window counts and status codes for billiard orbits from invariant starts."""
    ends = window_ends(edges, hole.measure)
    mf = max_flight(table)
    px, py = hole.point

    def work(lo, hi):
        q, phi = sample_invariant(table, key, hi - lo, lo)
        return bdyn.count_kernel(table.kinds, table.params, table.lengths, table.offsets,
                                 q, phi, px, py, hole.radius, ends, mf)

    return map_ordered(work, count, workers, min_chunk=16)


def bernoulli_counts(mu, edges, key, count):
    """Window counts of an i.i.d. Bernoulli(mu) indicator sequence.

    The number of trials in each window is fixed by the rescaling, so each
    count is Binomial(n_j, mu), drawn by inversion from uniform counters.
    """
    ends = window_ends(edges, mu)
    sizes = np.diff(np.concatenate([[0], ends]))
    keys = rng.stream_keys(key, count)
    out = np.empty((count, sizes.size), dtype=np.int64)
    for j, n in enumerate(sizes):
        u = rng.uniform_array(keys, j)
        out[:, j] = stats.binom.ppf(u, n, mu).astype(np.int64)
    return out


def interval_hitting(beta, hole, key, count, horizon, workers=None):
    def work(lo, hi):
        x0 = lsv_batch.invariant_starts(beta, key, hi - lo, lo)
        return lsv_batch.hit_kernel(x0, float(beta), hole.center, hole.radius, int(horizon))

    times = map_ordered(work, count, workers)
    return times, np.zeros(count, dtype=np.int64)


def billiard_hitting(table, hole, key, count, horizon, workers=None):
    mf = max_flight(table)
    px, py = hole.point

    def work(lo, hi):
        q, phi = sample_invariant(table, key, hi - lo, lo)
        return bdyn.hitting_kernel(table.kinds, table.params, table.lengths, table.offsets,
                                   q, phi, px, py, hole.radius, int(horizon), mf)

    return map_ordered(work, count, workers, min_chunk=16)


def bernoulli_hitting(mu, key, count, horizon):
    """Geometric(mu) first-success times by inversion; horizon + 1 when censored."""
    u = rng.uniform_array(rng.stream_keys(key, count), 0)
    n = np.ceil(np.log1p(-u) / math.log1p(-mu)).astype(np.int64)
    n = np.maximum(n, 1)
    return np.where(n > horizon, horizon + 1, n)


@dataclass(frozen=True)
class HittingSummary:
    ks: float
    survival_ln2: float
    censored_fraction: float
    samples: int
    horizon: int


def hitting_summary(times, mu, horizon):
    """KS distance of tau * mu to exp(1), treating censored values as > horizon."""
    times = np.asarray(times)
    m = times.size
    if m == 0:
        raise InsufficientDataError("no hitting times")
    censored = times > horizon
    t = np.sort(times * mu)
    # empirical CDF at the observed (uncensored) jump points
    obs = t[: m - int(censored.sum())]
    F = stats.expon.cdf
    idx = np.arange(1, obs.size + 1)
    d_plus = np.max(idx / m - F(obs)) if obs.size else 0.0
    d_minus = np.max(F(obs) - (idx - 1) / m) if obs.size else 0.0
    # beyond the horizon only the mass is known
    d_tail = abs(obs.size / m - F(horizon * mu))
    ks = float(max(d_plus, d_minus, d_tail))
    surv = float(np.mean(times * mu > math.log(2.0)))
    return HittingSummary(ks, surv, float(censored.mean()), m, int(horizon))


# ---------------------------------------------------------- Poisson distance


def poisson_pmf(k, mean):
    k = np.asarray(k)
    return stats.poisson.pmf(k, mean)


@dataclass(frozen=True)
class PoissonDistance:
    per_window: tuple
    max_window: float
    joint: float
    samples: int
    support: int
    per_window_se: tuple = ()
    joint_se: float = float("nan")

    @property
    def max_window_se(self):
        if not self.per_window_se:
            return float("nan")
        return float(self.per_window_se[int(np.argmax(self.per_window))])


def _window_tv(col, ell, top):
    k = np.arange(top + 1)
    emp = np.bincount(col, minlength=top + 1)[: top + 1] / col.size
    ref = poisson_pmf(k, ell)
    tail = stats.poisson.sf(top, ell)
    return 0.5 * (np.sum(np.abs(emp - ref)) + tail)


def _joint_tv(a, b, l1, l2, top):
    k = np.arange(top + 1)
    emp = np.zeros((top + 1, top + 1))
    np.add.at(emp, (a, b), 1.0)
    emp /= a.size
    ref = np.outer(poisson_pmf(k, l1), poisson_pmf(k, l2))
    return 0.5 * (np.sum(np.abs(emp - ref)) + (1.0 - ref.sum()))


def _tv_all(counts, lengths, top):
    per = [_window_tv(counts[:, j], lengths[j], top) for j in range(counts.shape[1])]
    joint = _joint_tv(counts[:, 0], counts[:, 1], lengths[0], lengths[1], top) \
        if counts.shape[1] >= 2 else float("nan")
    return per, joint


def empirical_tv_to_poisson(records, edges=None, bootstrap=200, key=0x7F4A):
    """Per-window and two-window total variation to the Poisson reference.

    ``records`` is a list of CountingRecord or an (m, windows) count array
    with ``edges``.  The pmf support is cut at the largest count plus 5 and
    the Poisson mass beyond it is added to the distance.  Standard errors
    come from a bootstrap over records.
    """
    if isinstance(records, np.ndarray):
        counts = np.asarray(records, dtype=np.int64)
        if edges is None:
            raise ConfigurationError("count arrays need window edges")
        edges = _check_edges(edges)
    else:
        if not records:
            raise InsufficientDataError("no records")
        edges = np.asarray(records[0].window_edges)
        if any(tuple(r.window_edges) != tuple(edges) for r in records):
            raise ConfigurationError("records do not share window edges")
        counts = np.array([r.counts for r in records], dtype=np.int64)
    m = counts.shape[0]
    if m < MIN_RECORDS:
        raise InsufficientDataError(f"{m} records; at least {MIN_RECORDS} needed")
    lengths = np.diff(edges)
    top = int(counts.max()) + TAIL_PAD
    per, joint = _tv_all(counts, lengths, top)
    per_se, joint_se = (), float("nan")
    if bootstrap:
        keys = rng.stream_keys(key, bootstrap)
        reps_w, reps_j = [], []
        for b in range(bootstrap):
            u = rng.uniform_sequence(int(keys[b]), m)
            idx = np.minimum((u * m).astype(np.int64), m - 1)
            pw, pj = _tv_all(counts[idx], lengths, top)
            reps_w.append(pw)
            reps_j.append(pj)
        per_se = tuple(float(s) for s in np.std(reps_w, axis=0, ddof=1))
        joint_se = float(np.std(reps_j, ddof=1))
    per = tuple(float(v) for v in per)
    return PoissonDistance(per, max(per), float(joint), m, top, per_se, joint_se)


def tv_between_pmfs(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size))
    q = np.pad(q, (0, n - q.size))
    return 0.5 * float(np.sum(np.abs(p - q)))


# ---------------------------------------------------------- rate exponent


@dataclass(frozen=True)
class RateFit:
    exponent: float
    stderr: float
    intercept: float
    r2: float
    inconclusive: bool
    floored: tuple


def convergence_rate_fit(radii, tv_values, samples=None):
    """Least-squares slope a of log TV against log r (TV ~ r**a).

    Non-positive TV values are replaced by the sampling floor 1/(2 samples)
    and flagged; the fit is inconclusive when R^2 < 0.8.
    """
    r = np.asarray(radii, dtype=np.float64)
    tv = np.asarray(tv_values, dtype=np.float64)
    if r.size < 3 or r.size != tv.size:
        raise DomainError("need at least three (radius, TV) pairs")
    if np.any(r <= 0) or r.max() / r.min() < 10.0 - 1e-9:
        raise DomainError("radii must be positive and span at least one decade")
    floored = tuple(bool(v) for v in tv <= 0)
    if any(floored):
        if not samples:
            raise DomainError("TV values <= 0 need the sample count for the floor")
        tv = np.where(tv <= 0, 1.0 / (2.0 * samples), tv)
    x, y = np.log(r), np.log(tv)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    dof = max(r.size - 2, 1)
    cov = ss_res / dof * np.linalg.inv(A.T @ A)
    slope = float(coef[0])
    if abs(slope) < 1e-14:
        slope = 0.0
    return RateFit(slope, float(np.sqrt(cov[0, 0])), float(coef[1]), float(r2),
                   bool(r2 < 0.8), floored)


def records_to_rows(experiment, counts):
    """Flat (experiment, sample, window, count) rows."""
    counts = np.asarray(counts)
    return [(experiment, i, j, int(counts[i, j]))
            for i in range(counts.shape[0]) for j in range(counts.shape[1])]
