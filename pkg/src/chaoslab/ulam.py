"""Ulam discretisation of the LSV transfer operator.

Entry (i, j) of the matrix is Leb(bin_i ∩ T^-1 bin_j) / Leb(bin_i), computed
from exact preimages of the bin edges: the right branch inverts in closed
form, the left branch by safeguarded Newton.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, ConvergenceError, DomainError
from .maps import _check_beta

MIN_BINS = 16
DEFAULT_BINS = 4096


def left_inverse(y, beta, tol=1e-14, max_iter=200):
    """Solve x * (1 + (2x)**beta) = y for x in [0, 1/2], elementwise."""
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if np.any((y < 0) | (y > 1)):
        raise DomainError("left_inverse needs y in [0, 1]")
    lo = np.zeros_like(y)
    hi = np.full_like(y, 0.5)
    # y/2 <= x <= y brackets the root since 1 <= 1 + (2x)**beta <= 2.
    lo = np.maximum(lo, 0.5 * y)
    hi = np.minimum(hi, y)
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        two_x = 2.0 * x
        pw = two_x ** beta
        f = x * (1.0 + pw) - y
        df = 1.0 + (1.0 + beta) * pw
        lo = np.where(f < 0, x, lo)
        hi = np.where(f > 0, x, hi)
        xn = x - f / df
        bad = (xn <= lo) | (xn >= hi) | ~np.isfinite(xn)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done = np.abs(xn - x) <= tol * np.maximum(x, 1e-300)
        x = xn
        if np.all(done | (hi - lo <= tol * np.maximum(x, 1e-300))):
            break
    else:
        raise ConvergenceError("left-branch inverse did not converge")
    return np.where(y == 0, 0.0, x)


@dataclass
class UlamModel:
    beta: float
    bins: int
    matrix: sp.csr_matrix
    density: np.ndarray = None
    residual: float = np.nan
    iterations: int = 0

    @property
    def edges(self):
        return np.linspace(0.0, 1.0, self.bins + 1)

    @property
    def midpoints(self):
        return (np.arange(self.bins) + 0.5) / self.bins

    @property
    def masses(self):
        return self.density / self.bins

    def cdf(self):
        c = np.cumsum(self.masses)
        c /= c[-1]
        return c

    def expect(self, values):
        """Midpoint-rule integral of ``values`` (sampled at midpoints) against the density."""
        return float(np.dot(values, self.masses))


def ulam_matrix(beta, bins=DEFAULT_BINS):
    _check_beta(beta)
    if int(bins) != bins or bins < MIN_BINS:
        raise ConfigurationError(f"bins must be an integer >= {MIN_BINS}, got {bins!r}")
    bins = int(bins)
    edges = np.linspace(0.0, 1.0, bins + 1)
    width = 1.0 / bins
    rows, cols, vals = [], [], []

    # Preimages of every edge under each branch.
    pre_left = left_inverse(edges, beta)
    pre_right = 0.5 * (edges + 1.0)

    for lo_branch, hi_branch, pre, fwd in (
        (0.0, 0.5, pre_left, lambda x: np.clip(x * (1.0 + (2.0 * x) ** beta), 0.0, 1.0)),
        (0.5, 1.0, pre_right, lambda x: np.clip(2.0 * x - 1.0, 0.0, 1.0)),
    ):
        a = np.maximum(edges[:-1], lo_branch)
        b = np.minimum(edges[1:], hi_branch)
        idx = np.nonzero(b > a)[0]
        a, b = a[idx], b[idx]
        ja = np.clip(np.floor(fwd(a) * bins).astype(np.int64), 0, bins - 1)
        jb = np.clip(np.ceil(fwd(b) * bins).astype(np.int64) - 1, 0, bins - 1)
        span = int(np.max(jb - ja)) + 1
        for off in range(span):
            j = ja + off
            ok = j <= jb
            i_, j_ = idx[ok], j[ok]
            length = np.minimum(b[ok], pre[j_ + 1]) - np.maximum(a[ok], pre[j_])
            keep = length > 0
            rows.append(i_[keep])
            cols.append(j_[keep])
            vals.append(length[keep] / width)

    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(bins, bins)
    )
    mat.sum_duplicates()
    # Exact row normalisation; the preimage lengths telescope so this only
    # removes rounding (< 1e-15 per row).
    rs = np.asarray(mat.sum(axis=1)).ravel()
    mat = sp.diags(1.0 / rs) @ mat
    return UlamModel(beta=float(beta), bins=bins, matrix=mat.tocsr())


def invariant_density(model, tol=1e-10, max_iter=100_000, start=None):
    """Leading left eigenvector of the Ulam matrix by power iteration.

    The residual is the max-norm of (pi P - pi) measured in density units.
    """
    pt = model.matrix.T.tocsr()
    n = model.bins
    pi = np.full(n, 1.0 / n) if start is None else np.asarray(start, float) / np.sum(start)
    res = np.inf
    for it in range(1, max_iter + 1):
        nxt = pt @ pi
        nxt /= nxt.sum()
        res = np.max(np.abs(nxt - pi)) * n
        pi = nxt
        if res <= tol:
            break
    else:
        raise ConvergenceError(
            f"power iteration residual {res:.3e} > {tol:g} after {max_iter} iterations"
        )
    model.density = pi * n
    model.residual = float(res)
    model.iterations = it
    return model.density


def half_values(model):
    """One-sided density values at the bins adjacent to x = 1/2."""
    k = int(np.floor(0.5 * model.bins))
    if model.bins % 2:
        return float(model.density[k]), float(model.density[k])
    return float(model.density[k - 1]), float(model.density[k])


_DENSITY_CACHE = {}


def solved_model(beta, bins=DEFAULT_BINS):
    """Cached ``ulam_matrix`` + ``invariant_density``."""
    key = (float(beta), int(bins))
    if key not in _DENSITY_CACHE:
        model = ulam_matrix(beta, bins)
        invariant_density(model)
        _DENSITY_CACHE[key] = model
    return _DENSITY_CACHE[key]


@dataclass(frozen=True)
class HalfDensity:
    value: float
    left: float
    right: float
    refined: float
    drift: float
    bins: int
    method: str


def density_at_half(beta, bins=None, rtol=0.01, detail=False, method="return"):
    """h(1/2) as the mean of the two one-sided values, checked by doubling bins.

    ``method="return"`` (default) reads both sides from the return-map
    construction in :mod:`chaoslab.induced`, whose error does not degrade as
    beta -> 1.  ``method="uniform"`` averages the two plain Ulam bins next
    to 1/2; at beta = 0.75 that estimate still drifts by about 1.2% between
    4096 and 8192 bins and the refinement check rejects it.
    """
    _check_beta(beta)
    vals = []
    if method == "return":
        from .induced import DEFAULT_RETURN_BINS, induced_measure

        bins = DEFAULT_RETURN_BINS // 2 if bins is None else int(bins)
        for nb in (bins, 2 * bins):
            left, right = induced_measure(beta, nb).half_values()
            vals.append((0.5 * (left + right), left, right))
    elif method == "uniform":
        bins = DEFAULT_BINS if bins is None else int(bins)
        for nb in (bins, 2 * bins):
            left, right = half_values(solved_model(beta, nb))
            vals.append((0.5 * (left + right), left, right))
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    v, left, right = vals[0]
    drift = abs(vals[1][0] - v) / v
    if drift >= rtol:
        raise ConvergenceError(f"h(1/2) drifts by {drift:.3%} on bin doubling ({method})")
    if detail:
        return HalfDensity(v, left, right, vals[1][0], drift, bins, method)
    return v


def transfer_norm_decay(beta, phi, p=1.0, n_max=100, bins=DEFAULT_BINS):
    """||P^n phi||_p in L^p(mu) for n = 1..n_max.

    ``phi`` is a callable on [0, 1]; it is sampled at bin midpoints and
    centred under the Ulam density.  P is the transfer operator of the
    invariant measure: P_mu(f) = P_Leb(f h) / h.
    """
    if p < 1:
        raise ConfigurationError(f"p must be >= 1, got {p!r}")
    if n_max < 10:
        raise ConfigurationError("n_max must be >= 10")
    m = solved_model(beta, bins)
    h = m.density
    vals = np.asarray(phi(m.midpoints), dtype=np.float64) * np.ones(bins)
    vals = vals - m.expect(vals)
    pt = m.matrix.T.tocsr()
    mass = vals * h / bins
    out = np.empty(n_max)
    pos = h > 0
    for k in range(n_max):
        mass = pt @ mass
        f = np.zeros(bins)
        f[pos] = mass[pos] * bins / h[pos]
        out[k] = (np.sum(np.abs(f) ** p * h) / bins) ** (1.0 / p)
    return out
