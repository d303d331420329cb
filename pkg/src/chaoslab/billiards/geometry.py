"""Billiard tables built from segments, circular arcs and cusp curves.

The boundary is a list of pieces traversed so that the table lies on the
left; the inward normal is the tangent rotated by +90 degrees.  Arcs carry
an orientation sign: +1 (counter-clockwise, table inside the circle,
focusing) or -1 (clockwise, table outside, dispersing).  Scatterer disks
are full clockwise circles.

Each piece is stored as a row of an (P, 8) float array so the collision
kernels can work on plain arrays:

    segment  x0 y0 x1 y1 tx ty  .  .
    arc      cx cy R  th0 span sgn .  .
    cusp     eta side eps0 dir A(eps0) . . .

A cusp curve is (s, side * s**eta / eta) for s in [0, eps0] with the tip at
the origin; ``dir`` = +1 walks away from the tip, -1 towards it.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .._jit import jit
from ..errors import GeometryError

SEGMENT, ARC, CUSP = 0, 1, 2
KIND_NAMES = {SEGMENT: "segment", ARC: "arc", CUSP: "cusp"}
TWO_PI = 2.0 * np.pi
CLOSE_TOL = 1e-10


# ----------------------------------------------------------- cusp arclength


@jit
def cusp_arclength(s, eta):
    """int_0^s sqrt(1 + u**(2 eta - 2)) du by its binomial series (s < 1)."""
    p = 2.0 * eta - 2.0
    r = s**p
    term_pow = s
    coef = 1.0
    total = s
    k = 0
    while True:
        k += 1
        coef *= (0.5 - (k - 1)) / k
        term_pow *= r
        add = coef * term_pow / (p * k + 1.0)
        total += add
        if abs(add) <= 1e-17 * total or k > 400:
            break
    return total


@jit
def cusp_abscissa(a, eta):
    """Inverse of :func:`cusp_arclength` by Newton (A' = sqrt(1 + s**(2 eta - 2)))."""
    if a <= 0.0:
        return 0.0
    s = a
    for _ in range(100):
        f = cusp_arclength(s, eta) - a
        ds = f / np.sqrt(1.0 + s ** (2.0 * eta - 2.0))
        s -= ds
        if abs(ds) <= 1e-16 * max(s, 1e-300):
            break
    return s


# ----------------------------------------------------------- piece kernels


@jit
def piece_frame(kind, par, u):
    """Point, unit tangent and inward normal at arclength u along a piece."""
    if kind == SEGMENT:
        tx, ty = par[4], par[5]
        x = par[0] + u * tx
        y = par[1] + u * ty
    elif kind == ARC:
        r = par[2]
        sgn = par[5]
        th = par[3] + sgn * u / r
        c, s_ = np.cos(th), np.sin(th)
        x = par[0] + r * c
        y = par[1] + r * s_
        tx, ty = -sgn * s_, sgn * c
    else:
        eta, side, eps0, dr, aeps = par[0], par[1], par[2], par[3], par[4]
        a = u if dr > 0 else aeps - u
        s = cusp_abscissa(a, eta)
        x = s
        y = side * s**eta / eta
        slope = side * s ** (eta - 1.0)
        nrm = np.sqrt(1.0 + slope * slope)
        tx, ty = dr / nrm, dr * slope / nrm
    return x, y, tx, ty, -ty, tx


@jit
def piece_distance(kind, par, x, y):
    """Residual of (x, y) against the piece's defining equation."""
    if kind == SEGMENT:
        return abs((x - par[0]) * par[5] - (y - par[1]) * par[4])
    if kind == ARC:
        return abs(np.hypot(x - par[0], y - par[1]) - par[2])
    return abs(y - par[1] * abs(x) ** par[0] / par[0])


# ------------------------------------------------------------------ pieces


@dataclass(frozen=True)
class BoundaryPiece:
    kind: int
    params: tuple
    length: float

    @property
    def name(self):
        return KIND_NAMES[self.kind]

    def frame(self, u):
        return piece_frame(self.kind, np.asarray(self.params, dtype=np.float64), float(u))

    def endpoints(self):
        a = self.frame(0.0)[:2]
        b = self.frame(self.length)[:2]
        return np.array(a), np.array(b)

    def record(self):
        keys = {
            SEGMENT: ("x0", "y0", "x1", "y1", "tx", "ty"),
            ARC: ("cx", "cy", "radius", "theta0", "span", "orientation"),
            CUSP: ("eta", "side", "eps0", "direction", "arclength_eps0"),
        }[self.kind]
        rec = {"kind": self.name, "arclength": self.length}
        rec.update({k: float(v) for k, v in zip(keys, self.params)})
        if self.kind == ARC:
            rec["type"] = "focusing" if self.params[5] > 0 else "dispersing"
        return rec


def segment(p0, p1):
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    d = p1 - p0
    length = float(np.hypot(*d))
    if length <= 0:
        raise GeometryError("segment has zero length")
    t = d / length
    return BoundaryPiece(SEGMENT, (p0[0], p0[1], p1[0], p1[1], t[0], t[1], 0.0, 0.0), length)


def arc(center, radius, theta0, span, orientation):
    """Arc from angle theta0 sweeping ``span`` radians; orientation +1 CCW, -1 CW."""
    if radius <= 0:
        raise GeometryError(f"arc radius must be positive, got {radius}")
    if not (0.0 < span <= TWO_PI + 1e-15):
        raise GeometryError(f"arc span must lie in (0, 2 pi], got {span}")
    if orientation not in (1, -1):
        raise GeometryError("arc orientation must be +1 or -1")
    return BoundaryPiece(
        ARC,
        (float(center[0]), float(center[1]), float(radius), float(theta0), float(span),
         float(orientation), 0.0, 0.0),
        float(radius * span),
    )


def cusp_curve(eta, side, eps0, direction):
    if eta <= 2:
        raise GeometryError(f"cusp exponent eta must exceed 2, got {eta}")
    if not (0.0 < eps0 < 1.0):
        raise GeometryError("cusp eps0 must lie in (0, 1) for the arclength series")
    aeps = float(cusp_arclength(float(eps0), float(eta)))
    return BoundaryPiece(
        CUSP, (float(eta), float(side), float(eps0), float(direction), aeps, 0.0, 0.0, 0.0), aeps
    )


# ------------------------------------------------------------------- table


@dataclass
class BilliardTable:
    """Closed boundary made of one or more closed chains of pieces.

    ``chains`` lists (first, last) piece indices of each closed component:
    the outer wall first, then any scatterers.
    """

    pieces: list
    preset_tag: str
    chains: list = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.chains is None:
            self.chains = [(0, len(self.pieces) - 1)]
        self.kinds = np.array([p.kind for p in self.pieces], dtype=np.int64)
        self.params = np.array([p.params for p in self.pieces], dtype=np.float64)
        self.lengths = np.array([p.length for p in self.pieces], dtype=np.float64)
        self.offsets = np.concatenate([[0.0], np.cumsum(self.lengths)])
        self.total_length = float(self.offsets[-1])
        self.validate()

    # geometry checks
    def validate(self):
        if abs(self.total_length - float(np.sum(self.lengths))) > 1e-10:
            raise GeometryError("total_length differs from the sum of piece lengths")
        for first, last in self.chains:
            for i in range(first, last + 1):
                nxt = first if i == last else i + 1
                end = self.pieces[i].endpoints()[1]
                start = self.pieces[nxt].endpoints()[0]
                gap = float(np.hypot(*(end - start)))
                if gap > CLOSE_TOL:
                    raise GeometryError(
                        f"pieces {i} and {nxt} do not meet (gap {gap:.3e} > {CLOSE_TOL:g})"
                    )

    @property
    def has_cusp(self):
        return bool(np.any(self.kinds == CUSP))

    def piece_of(self, q):
        q = float(q) % self.total_length
        k = int(np.searchsorted(self.offsets, q, side="right") - 1)
        return min(max(k, 0), len(self.pieces) - 1), q - self.offsets[min(max(k, 0), len(self.pieces) - 1)]

    def frame(self, q):
        """(x, y, tx, ty, nx, ny) at boundary coordinate q."""
        k, u = self.piece_of(q)
        return piece_frame(self.kinds[k], self.params[k], u)

    def point(self, q):
        return np.array(self.frame(q)[:2])

    def junctions(self):
        """Arclength coordinates of piece endpoints."""
        return self.offsets[:-1].copy()

    def area(self):
        """Green's theorem, 1/2 closed integral of (x dy - y dx)."""
        total = 0.0
        for p in self.pieces:
            if p.kind == SEGMENT:
                x0, y0, x1, y1 = p.params[:4]
                total += 0.5 * (x0 * y1 - y0 * x1)
            elif p.kind == ARC:
                cx, cy, r, th0, span, sgn = p.params[:6]
                a, b = th0, th0 + sgn * span
                # x dy - y dx on c + r e(th): r^2 dth + r (cx cos + cy sin) dth
                # - r (cy cos ... ); integrate exactly
                val = r * r * (b - a)
                val += cx * r * (np.sin(b) - np.sin(a)) + cy * r * (np.cos(a) - np.cos(b))
                total += 0.5 * val
            else:
                eta, side, eps0, dr = p.params[:4]
                # x dy - y dx along (s, side s^eta/eta), s-integral then orient
                f = lambda s: side * (s * s ** (eta - 1.0) - s**eta / eta)
                val, _ = integrate.quad(f, 0.0, eps0, epsabs=1e-14)
                total += 0.5 * val * dr
        return float(total)

    def mean_free_path(self):
        """pi |Q| / |dQ|."""
        return float(np.pi * self.area() / self.total_length)

    def records(self):
        return [dict(index=i, **p.record()) for i, p in enumerate(self.pieces)]

    def describe(self):
        return {"preset": self.preset_tag, "total_length": self.total_length,
                **{k: v for k, v in self.meta.items()}}
