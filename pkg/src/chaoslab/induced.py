"""Invariant measure of the LSV map through its first-return map to Y = (1/2, 1].

Ulam on uniform bins of [0, 1] converges like bins**(beta - 1): the neutral
fixed point stores mass in layers far thinner than a bin.  The return map
F = T^R on Y has full branches and is uniformly expanding, so Ulam applied
to F converges quickly.  The measure on [0, 1/2] is then rebuilt from the
excursions of F:

    levels   L_j = (x_{j+1}, x_j],   x_0 = 1/2,   x_{j+1} = g(x_j)
    mu       = (nu + sum_{k>=1} T^k_* nu|_{R>k}) / Z,      Z = E_nu[R]

with g the left-branch inverse and nu = h_Y dx the F-invariant probability.
Writing q(z) = h_Y((z + 1) / 2) / 2 for the density of T_* nu on [0, 1/2],

    int phi dmu = (int_Y phi h_Y + sum_j int_{L_j} q(z) B_j(z) dz) / Z
    B_j(z)      = phi(z) + phi(Tz) + ... + phi(T^j z)

and each level is pulled back to L_0 by G_j = g^j so one set of quadrature
nodes serves all of them.  The ladder x_j is computed to depth J; deeper
levels use v_j = x_j**-beta = a j - b log j + C + D log(j)/j + E/j with
a = beta 2**beta and b = (1 + beta) 2**beta / 2.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy import integrate

from ._jit import jit
from .errors import ConfigurationError, ConvergenceError
from .maps import _check_beta, left_branch_inverse
from .observables import evaluate

DEFAULT_RETURN_BINS = 1024
DEFAULT_DEPTH = 20_000
CHEB_DEGREE = 24
FLOOR = 1e-280


@jit
def ladder(beta, depth):
    """x_0 = 1/2, x_{j+1} = g(x_j), stopping early if the ladder underflows."""
    out = np.empty(depth + 2)
    out[0] = 0.5
    n = depth + 2
    for j in range(1, depth + 2):
        out[j] = left_branch_inverse(out[j - 1], beta)
        if out[j] < FLOOR:
            n = j + 1
            break
    return out[:n]


@jit
def _cheb_eval(c, w):
    # Clenshaw on t = 4w - 3, mapping [1/2, 1] onto [-1, 1]
    t = 4.0 * w - 3.0
    b0 = 0.0
    b1 = 0.0
    for k in range(c.shape[0] - 1, 0, -1):
        b0, b1 = c[k] + 2.0 * t * b0 - b1, b0
    return c[0] + t * b0 - b1


@jit
def _return_matrix(beta, bins, tail_level):
    """Ulam matrix of F on Y with ``bins`` equal bins.

    Column l collects the F-preimages of bin l: for each return time k the
    interval ((G_{k-1}(e_l) + 1)/2, (G_{k-1}(e_{l+1}) + 1)/2].  Branches
    deeper than ``tail_level`` sit inside bin 0; their total mass is added
    to row 0 with the column profile of the last explicit branch.
    """
    scale = 2.0 * bins
    mat = np.zeros((bins, bins))
    g = np.empty(bins + 1)
    for l in range(bins + 1):
        g[l] = 0.5 + l / scale
    k = 1
    while True:
        top = 0.5 * (g[bins] + 1.0)
        for l in range(bins):
            a = 0.5 * (g[l] + 1.0)
            b = 0.5 * (g[l + 1] + 1.0)
            i = int((a - 0.5) * scale)
            if i >= bins:
                i = bins - 1
            while a < b and i < bins:
                edge = 0.5 + (i + 1) / scale
                end = b if b < edge else edge
                if end > a:
                    mat[i, l] += end - a
                a = end
                i += 1
        if g[bins] <= tail_level and top < 0.5 + 1.0 / scale:
            break
        for l in range(bins + 1):
            g[l] = left_branch_inverse(g[l], beta)
        k += 1
    # remaining branches: total length sum_{m >= k} (x_{m-1} - x_m) / 2
    # = g[bins] / 2 after one more pull-back, with the current profile
    prof = np.empty(bins)
    span = g[bins] - g[0]
    for l in range(bins):
        prof[l] = (g[l + 1] - g[l]) / span
    nxt = left_branch_inverse(g[bins], beta)
    rest = 0.5 * nxt
    for l in range(bins):
        mat[0, l] += rest * prof[l]
    return mat * scale, k


@jit
def _level_pass(beta, nodes, weights, hc, coef, depth):
    """Sum over levels j < depth of int_{L_j} q B_j, pulled back to L_0.

    Returns (I_phi, I_one, Q, cbar, dsum) where Q[j] = int_{L_j} q, and cbar
    is the G_J'-weighted mean of B_{J-1} over the nodes at depth J.
    """
    nq = nodes.shape[0]
    q_level = np.zeros(depth)
    i_phi = 0.0
    i_one = 0.0
    c_wsum = 0.0
    d_wsum = 0.0
    for i in range(nq):
        z = nodes[i]
        d = 1.0
        c = 0.0
        w = weights[i]
        for j in range(depth):
            c += evaluate(coef, z)
            qq = 0.5 * _cheb_eval(hc, 0.5 * (z + 1.0)) * d * w
            q_level[j] += qq
            i_phi += qq * c
            i_one += qq * (j + 1)
            z = left_branch_inverse(z, beta)
            d /= 1.0 + (1.0 + beta) * (2.0 * z) ** beta
        c_wsum += w * d * c
        d_wsum += w * d
    cbar = c_wsum / d_wsum if d_wsum > 0 else 0.0
    return i_phi, i_one, q_level, cbar, d_wsum


@jit
def _lift(beta, xs, hc, stop):
    """Z * h(x) on [0, 1/2] from sum_k q(G_k x) G_k'(x), closed by the
    continuum estimate sum_{k>K} G_k'(x) ~ G_K'(x) * y**-beta / 2**beta."""
    out = np.empty(xs.shape[0])
    cst = 2.0 ** beta
    q0 = 0.5 * _cheb_eval(hc, 0.5)
    for i in range(xs.shape[0]):
        y = xs[i]
        d = 1.0
        s = 0.5 * _cheb_eval(hc, 0.5 * (y + 1.0))
        for _ in range(10_000_000):
            if y <= stop:
                break
            y = left_branch_inverse(y, beta)
            d /= 1.0 + (1.0 + beta) * (2.0 * y) ** beta
            s += 0.5 * _cheb_eval(hc, 0.5 * (y + 1.0)) * d
        if y > 0.0:
            s += q0 * d * y ** (-beta) / cst
        out[i] = s
    return out


@dataclass(frozen=True)
class LadderTail:
    """Closed-form continuation of the ladder beyond its computed depth."""

    beta: float
    depth: int
    a: float
    b: float
    c: float
    d: float
    e: float
    exact: bool

    def v(self, j):
        j = np.asarray(j, dtype=np.float64)
        lj = np.log(j)
        return self.a * j - self.b * lj + self.c + self.d * lj / j + self.e / j

    def x(self, j):
        return self.v(j) ** (-1.0 / self.beta)

    def sum_beyond(self, power=1.0):
        """sum_{m > depth} x_m**power by Euler-Maclaurin on the continuation."""
        if self.exact:
            return 0.0
        f = lambda t: self.x(t) ** power
        J = float(self.depth)
        # x**power ~ t**-p; t = J r**-k with k = 1/(p - 1) makes the
        # integrand bounded on r in (0, 1]
        p = power / self.beta
        k = 1.0 / (p - 1.0)
        g = lambda r: f(J * r ** (-k)) * k * J * r ** (-k - 1.0) if r > 0 else 0.0
        val, _ = integrate.quad(g, 0.0, 1.0, limit=200, epsabs=0.0, epsrel=1e-12)
        h = 1e-3 * J
        d1 = (f(J + h) - f(J - h)) / (2 * h)
        d3 = (f(J + 2 * h) - 2 * f(J + h) + 2 * f(J - h) - f(J - 2 * h)) / (2 * h**3)
        return float(val - 0.5 * f(J) - d1 / 12.0 + d3 / 720.0)


def fit_tail(beta, xs):
    """Fit C, D, E of the continuation to v at depths J, J/2, J/4."""
    depth = len(xs) - 2
    exact = xs[-1] < FLOOR or beta == 0.0 or depth < 64
    a = beta * 2.0**beta
    b = 0.5 * (1.0 + beta) * 2.0**beta
    if exact:
        return LadderTail(beta, depth, a, b, 0.0, 0.0, 0.0, True)
    js = np.array([depth, depth // 2, depth // 4], dtype=np.float64)
    v = xs[js.astype(int)] ** (-beta)
    rhs = v - a * js + b * np.log(js)
    mat = np.column_stack([np.ones(3), np.log(js) / js, 1.0 / js])
    c, d, e = np.linalg.solve(mat, rhs)
    return LadderTail(beta, depth, a, b, float(c), float(d), float(e), False)


def _gauss_panels(lo, hi, panels, order):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


class InducedMeasure:
    """Invariant probability of T_beta assembled from the return map to Y.

    Parameters
    ----------
    beta : float in [0, 1)
    bins : Ulam bins on Y = (1/2, 1]
    depth : ladder depth J used by the level sums
    """

    def __init__(self, beta, bins=DEFAULT_RETURN_BINS, depth=DEFAULT_DEPTH,
                 tol=1e-12, max_iter=10_000):
        _check_beta(beta)
        if bins < 16:
            raise ConfigurationError("return-map Ulam needs at least 16 bins")
        self.beta = float(beta)
        self.bins = int(bins)
        self.xs = ladder(self.beta, int(depth))
        self.depth = len(self.xs) - 2
        self.tail = fit_tail(self.beta, self.xs)
        self.s1 = self.tail.sum_beyond(1.0)

        mat, self.branches = _return_matrix(self.beta, self.bins, 1e-3 / self.bins)
        mat /= mat.sum(axis=1, keepdims=True)
        self.matrix = mat
        pi = np.full(self.bins, 1.0 / self.bins)
        mt = np.ascontiguousarray(mat.T)
        for it in range(1, max_iter + 1):
            nxt = mt @ pi
            nxt /= nxt.sum()
            res = np.max(np.abs(nxt - pi)) * self.bins
            pi = nxt
            if res <= tol:
                break
        else:
            raise ConvergenceError(f"return-map power iteration stalled at {res:.2e}")
        self.iterations = it
        self.bin_density = pi * 2.0 * self.bins  # density on Y, integrates to 1

        # smooth representative of h_Y: least squares in Chebyshev basis
        mids = 0.5 + (np.arange(self.bins) + 0.5) / (2.0 * self.bins)
        hc = cheb.chebfit(4.0 * mids - 3.0, self.bin_density, CHEB_DEGREE)
        total = cheb.chebval(1.0, cheb.chebint(hc, lbnd=-1)) / 4.0
        self.hc = np.ascontiguousarray(hc / total)
        self.fit_residual = float(
            np.max(np.abs(cheb.chebval(4.0 * mids - 3.0, self.hc) - self.bin_density))
        )

        self.nodes, self.weights = _gauss_panels(self.xs[1], self.xs[0], 8, 12)
        self.ynodes, self.yweights = _gauss_panels(0.5, 1.0, 16, 12)
        zero = np.zeros(9)
        _, i_one, q_level, _, _ = _level_pass(
            self.beta, self.nodes, self.weights, self.hc, zero, self.depth)
        self.q0 = 0.5 * float(_cheb_eval(self.hc, 0.5))
        J = self.depth
        tail_one = self.q0 * (self.xs[J] * J + self.xs[J] + self.s1)
        self.Z = 1.0 + i_one + tail_one
        self.level_q = q_level
        self._tables = None

    # -- integrals --------------------------------------------------------

    def expect(self, coef):
        """int phi dmu for an interval observable given by basis coefficients."""
        coef = np.ascontiguousarray(getattr(coef, "array", coef), dtype=np.float64)
        on_y = float(np.sum(self.yweights * _eval_vec(coef, self.ynodes)
                            * _cheb_vec(self.hc, self.ynodes)))
        i_phi, _, _, cbar, _ = _level_pass(
            self.beta, self.nodes, self.weights, self.hc, coef, self.depth)
        J = self.depth
        phi0 = float(evaluate(coef, 0.0))
        tail = self.q0 * (self.xs[J] * cbar + phi0 * (self.xs[J] + self.s1))
        return (on_y + i_phi + tail) / self.Z

    def density(self, x, stop=1e-4):
        """h(x) for x in (0, 1]; the value at 1/2 is the left limit."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.empty_like(x)
        left = x <= 0.5
        if np.any(left):
            out[left] = _lift(self.beta, x[left], self.hc, stop) / self.Z
        if np.any(~left):
            out[~left] = _cheb_vec(self.hc, x[~left]) / self.Z
        return out

    def half_values(self):
        """(h(1/2-), h(1/2+))."""
        left = float(_lift(self.beta, np.array([0.5]), self.hc, 1e-7)[0]) / self.Z
        right = float(_cheb_eval(self.hc, 0.5)) / self.Z
        return left, right

    def mass_below(self, level):
        """mu([0, x_level]) for level <= J."""
        J = self.depth
        j = np.arange(level, J)
        body = np.sum((j - level + 1) * self.level_q[level:J])
        tail = self.q0 * ((J - level) * self.xs[J] + self.xs[J] + self.s1)
        return float((body + tail) / self.Z)

    # -- sampling ---------------------------------------------------------

    def _build_tables(self):
        J = self.depth
        split = int(np.searchsorted(-self.xs[: J + 1], -2e-3))
        split = max(1, min(split, J - 1))
        x_split = self.xs[split]

        deep_mass = self.mass_below(split)
        y_mass = 1.0 / self.Z
        mid_mass = 1.0 - y_mass - deep_mass

        # deep levels split..J-1, then the continuum [0, x_J]
        suffix = np.cumsum(self.level_q[::-1])[::-1]  # sum_{j >= l, j < J} Q_j
        lvl = np.arange(split, J)
        lvl_mass = (suffix[split:J] + self.q0 * self.xs[J]) / self.Z
        core = self.q0 * (self.xs[J] + self.s1) / self.Z
        deep_cdf = np.concatenate([np.cumsum(lvl_mass), [np.sum(lvl_mass) + core]])
        deep_cdf /= deep_cdf[-1]

        grid = np.geomspace(x_split, 0.5, 4097)
        hg = self.density(grid)
        yg = np.linspace(0.5, 1.0, 2049)
        hy = _cheb_vec(self.hc, yg)
        self._tables = dict(
            split=split, x_split=x_split, probs=np.array([y_mass, mid_mass, deep_mass]),
            deep_levels=lvl, deep_cdf=deep_cdf,
            mid=_PiecewiseLinear(grid, hg), y=_PiecewiseLinear(yg, hy),
        )

    def sample(self, u1, u2):
        """Map two arrays of uniforms to mu-distributed points (vectorised)."""
        if self._tables is None:
            self._build_tables()
        tb = self._tables
        u1 = np.asarray(u1, dtype=np.float64)
        u2 = np.asarray(u2, dtype=np.float64)
        out = np.empty(u1.shape)
        p_y, p_mid, _ = tb["probs"]
        in_y = u1 < p_y
        in_mid = (~in_y) & (u1 < p_y + p_mid)
        deep = ~(in_y | in_mid)
        out[in_y] = tb["y"].invert(u2[in_y])
        out[in_mid] = tb["mid"].invert(u2[in_mid])
        if np.any(deep):
            # reuse u1's position inside the deep slab to pick the level
            r = (u1[deep] - p_y - p_mid) / (1.0 - p_y - p_mid)
            r = np.clip(r, 0.0, 1.0)
            k = np.searchsorted(tb["deep_cdf"], r, side="right")
            nlev = len(tb["deep_levels"])
            res = np.empty(r.shape)
            known = k < nlev
            lv = tb["deep_levels"][k[known]]
            hi = self.xs[lv]
            lo = self.xs[lv + 1]
            res[known] = lo + u2[deep][known] * (hi - lo)
            # continuum below x_J: density ~ x**-beta
            res[~known] = self.xs[self.depth] * u2[deep][~known] ** (1.0 / (1.0 - self.beta))
            out[deep] = res
        return out


def _eval_vec(coef, x):
    return np.array([evaluate(coef, float(t)) for t in x])


def _cheb_vec(hc, w):
    return cheb.chebval(4.0 * np.asarray(w) - 3.0, hc)


class _PiecewiseLinear:
    """Exact inverse-CDF sampling of a piecewise-linear density on a grid."""

    def __init__(self, grid, dens):
        self.grid = np.asarray(grid, dtype=np.float64)
        self.dens = np.maximum(np.asarray(dens, dtype=np.float64), 0.0)
        cell = 0.5 * (self.dens[1:] + self.dens[:-1]) * np.diff(self.grid)
        self.cdf = np.concatenate([[0.0], np.cumsum(cell)])
        self.total = self.cdf[-1]

    def invert(self, u):
        target = np.asarray(u, dtype=np.float64) * self.total
        k = np.clip(np.searchsorted(self.cdf, target, side="right") - 1, 0, len(self.grid) - 2)
        a, b = self.grid[k], self.grid[k + 1]
        fa, fb = self.dens[k], self.dens[k + 1]
        rem = target - self.cdf[k]
        slope = (fb - fa) / (b - a)
        # solve fa t + slope t**2 / 2 = rem in the stable form
        disc = np.sqrt(np.maximum(fa * fa + 2.0 * slope * rem, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(fa + disc > 0, 2.0 * rem / (fa + disc), 0.0)
        return np.clip(a + t, a, b)


@lru_cache(maxsize=16)
def induced_measure(beta, bins=DEFAULT_RETURN_BINS, depth=DEFAULT_DEPTH):
    """Cached :class:`InducedMeasure`."""
    return InducedMeasure(float(beta), int(bins), int(depth))
