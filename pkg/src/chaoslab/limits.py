"""Birkhoff sums and their distributional diagnostics.

Covers large and maximal large deviations, return-time tails, exponent
fits, Green-Kubo variances, CLT and quenched CLT checks, stable limit laws
for T_beta and for cusp billiards, and a law-of-iterated-logarithm
diagnostic.  Verdicts are three-valued: pass, fail or inconclusive.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import lsv_batch, rng
from .errors import (
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    TruncationWarning,
)
from .maps import QuenchedDriver, _check_beta
from .observables import NBASIS, Observable, evaluate_array
from .parallel import map_ordered
from .special import gamma, normal_cdf

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
CF_POINTS = (0.5, 1.0, 2.0)
MIN_CF_SAMPLES = 1000


# -------------------------------------------------------------- observables


def invariant_mean(beta, phi, bins=None):
    from .induced import DEFAULT_RETURN_BINS, induced_measure

    return induced_measure(float(beta), bins or DEFAULT_RETURN_BINS).expect(_coef(phi))


def centered(phi, beta, bins=None):
    """phi minus its invariant mean under T_beta."""
    return phi.shifted(invariant_mean(beta, phi, bins))


def vanishing_observable(beta, bins=None):
    """x - a x**2 with a chosen so the invariant mean is zero; phi(0) = 0."""
    from .induced import DEFAULT_RETURN_BINS, induced_measure

    meas = induced_measure(float(beta), bins or DEFAULT_RETURN_BINS)
    e1 = meas.expect(Observable.from_terms(x=1.0).array)
    e2 = meas.expect(Observable.from_terms(x2=1.0).array)
    obs = Observable.from_terms(name="vanishing_at_zero", x=1.0, x2=-e1 / e2)
    return Observable(obs.coef, obs.name, True, obs.holder_tag)


def _coef(phi):
    c = np.ascontiguousarray(getattr(phi, "array", phi), dtype=np.float64)
    if c.shape != (NBASIS,):
        raise ConfigurationError(f"observable needs {NBASIS} basis coefficients")
    return c


# ----------------------------------------------------------- Birkhoff sums


def birkhoff_average(stream, phi, n):
    """S_n / n along the first n points of ``stream`` (Kahan summation)."""
    n = int(n)
    if n <= 0:
        raise DomainError("n must be positive")
    coef = _coef(phi)
    s = 0.0
    comp = 0.0
    seen = 0
    for x in stream:
        if seen == n:
            break
        y = float(evaluate_array(coef, x)) - comp
        t = s + y
        comp = (t - s) - y
        s = t
        seen += 1
    if seen < n:
        raise InsufficientDataError(f"stream ended after {seen} of {n} points")
    return s / n


def birkhoff_sums(beta, phi, n, key, samples, workers=None, start=0):
    """S_n for ``samples`` invariant starts of T_beta."""
    coef = _coef(phi)

    def work(lo, hi):
        x0 = lsv_batch.invariant_starts(beta, key, hi - lo, start + lo)
        return lsv_batch.birkhoff_sums_kernel(x0, float(beta), coef, int(n))

    return map_ordered(work, int(samples), workers)


# ------------------------------------------------------------- tail curves


@dataclass(frozen=True)
class TailCurve:
    abscissae: tuple
    probabilities: tuple
    samples: tuple
    epsilon: float = float("nan")
    label: str = ""
    censored: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        if np.any((p < 0) | (p > 1)):
            raise DomainError("tail probabilities must lie in [0, 1]")


def default_epsilon(phi, fraction=0.1):
    return fraction * phi.sup_norm()


def _ld_pass(beta, coef, n_first, n_last, key, samples, workers):
    def work(lo, hi):
        x0 = lsv_batch.invariant_starts(beta, key, hi - lo, lo)
        return lsv_batch.ld_kernel(x0, float(beta), coef, int(n_first), int(n_last))

    return map_ordered(work, int(samples), workers)


def ld_tail(beta, phi, epsilon, n_grid, samples, key, workers=None, values=False):
    """mu(|S_n / n| >= epsilon) for each n, from fresh invariant starts.

    Starts for abscissa n use the stream derive(key, n).
    """
    if epsilon < 0:
        raise DomainError("epsilon must be non-negative")
    if samples < 1000:
        raise InsufficientDataError("at least 10^3 samples per abscissa")
    coef = _coef(phi)
    probs, raw = [], []
    for n in n_grid:
        at, _ = _ld_pass(beta, coef, n, n, rng.derive(key, int(n)), samples, workers)
        probs.append(float(np.mean(at >= epsilon)))
        raw.append(at)
    curve = TailCurve(tuple(int(n) for n in n_grid), tuple(probs),
                      tuple([int(samples)] * len(probs)), float(epsilon), "ld")
    return (curve, raw) if values else curve


def max_ld_tail(beta, phi, epsilon, N_grid, samples, key, horizon_factor=10, workers=None,
                values=False):
    """mu(sup_{N <= n <= horizon_factor N} |S_n / n| >= epsilon).

    The supremum over n >= N is truncated at horizon_factor * N.  Starts
    match :func:`ld_tail` at n = N, so the two tails compare start by start.
    """
    if horizon_factor < 10:
        raise ConfigurationError("horizon_factor must be at least 10")
    if epsilon < 0:
        raise DomainError("epsilon must be non-negative")
    if samples < 1000:
        raise InsufficientDataError("at least 10^3 samples per abscissa")
    coef = _coef(phi)
    probs, raw = [], []
    for N in N_grid:
        at, sup = _ld_pass(beta, coef, N, int(horizon_factor) * int(N),
                           rng.derive(key, int(N)), samples, workers)
        probs.append(float(np.mean(sup >= epsilon)))
        raw.append((at, sup))
    curve = TailCurve(tuple(int(n) for n in N_grid), tuple(probs),
                      tuple([int(samples)] * len(probs)), float(epsilon),
                      f"max_ld(h={int(horizon_factor)})")
    return (curve, raw) if values else curve


def return_times(beta, samples, key, cap=lsv_batch.RETURN_CAP, workers=None):
    """First return times to [1/2, 1] from Lebesgue starts in [1/2, 1)."""
    _check_beta(beta)

    def work(lo, hi):
        x0 = lsv_batch.lebesgue_starts(key, hi - lo, lo, 0.5, 1.0)
        return lsv_batch.returns_kernel(x0, float(beta), int(cap))

    return map_ordered(work, int(samples), workers)


def return_time_tail(beta, N_grid, samples, key, cap=lsv_batch.RETURN_CAP, workers=None):
    """Leb(R > N) on [1/2, 1]; censored starts count as R > cap."""
    r = return_times(beta, samples, key, cap, workers)
    censored = int(np.sum(r > cap))
    probs = tuple(float(np.mean(r > N)) for N in N_grid)
    return TailCurve(tuple(int(n) for n in N_grid), probs, tuple([int(samples)] * len(probs)),
                     label=f"return(beta={beta:g})", censored=(censored,))


def return_tail_exact(beta, N):
    """Leb(R > N | [1/2, 1]) = x_{N-1}, the (N-1)-th preimage of 1/2 on the
    left branch, for N >= 1."""
    from .induced import ladder

    N = np.atleast_1d(np.asarray(N, dtype=np.int64))
    xs = ladder(float(beta), int(N.max()))
    return xs[N - 1]


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    stderr: float
    inconclusive: bool
    floored: tuple = ()


def exponent_fit(curve, weighted=True):
    """Weighted least squares of log p on log N.

    Weights are inverse binomial variances of log p, (m p / (1 - p)); zero
    probabilities take the floor 1/(2m) and are flagged.  The fit is
    inconclusive when R^2 < 0.8.
    """
    x = np.log(np.asarray(curve.abscissae, dtype=np.float64))
    p = np.asarray(curve.probabilities, dtype=np.float64)
    m = np.asarray(curve.samples, dtype=np.float64) if curve.samples else None
    if x.size < 3:
        raise DomainError("exponent fit needs at least three abscissae")
    floored = tuple(bool(v) for v in p <= 0)
    if any(floored):
        if m is None:
            raise DomainError("zero probabilities need sample counts for the floor")
        p = np.where(p <= 0, 1.0 / (2.0 * m), p)
    y = np.log(p)
    if weighted and m is not None:
        w = m * p / np.maximum(1.0 - p, 1.0 / m)
    else:
        w = np.ones_like(p)
    A = np.column_stack([x, np.ones_like(x)])
    AtW = A.T * w
    cov_unit = np.linalg.inv(AtW @ A)
    coef = cov_unit @ (AtW @ y)
    resid = y - A @ coef
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    ss_res = float(np.sum(w * resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    if weighted and m is not None:
        var = cov_unit[0, 0]
    else:
        var = cov_unit[0, 0] * ss_res / max(x.size - 2, 1)
    slope = float(coef[0])
    if abs(slope) < 1e-13:
        slope = 0.0
    return ExponentFit(slope, float(coef[1]), float(r2), float(np.sqrt(var)), bool(r2 < 0.8),
                       floored)


# -------------------------------------------------------------- Green-Kubo


@dataclass(frozen=True)
class GreenKubo:
    sigma2: float
    covariances: tuple
    tail_fraction: float
    method: str
    samples: int
    length: int


def _gk_doubling(coef, k_max, level=16, sub=16):
    """Covariances for the doubling map from its transfer operator.

    On functions constant on the 2**level dyadic bins the operator
    Pf(x) = (f(x/2) + f((x+1)/2)) / 2 is exact, and C_k = int (P^k f) f dx.
    phi is replaced by its bin averages (exact for dyadic step functions).
    """
    nb = 2**level
    x = (np.arange(nb * sub) + 0.5) / (nb * sub)
    f = evaluate_array(coef, x).reshape(nb, sub).mean(axis=1)
    f = f - f.mean()
    j = np.arange(nb)
    lo, hi = j // 2, (j + nb) // 2
    cov = np.empty(k_max + 1)
    g = f.copy()
    for k in range(k_max + 1):
        cov[k] = float(np.mean(g * f))
        g = 0.5 * (g[lo] + g[hi])
    return cov


def green_kubo_sigma2(beta, phi, key=0, k_max=200, n=10_000, samples=1000, workers=None):
    """sigma^2 = Var(phi) + 2 sum_{k=1}^{k_max} Cov(phi, phi o T^k).

    Covariances are Monte Carlo averages along ``samples`` invariant orbits
    of length n.  For beta = 0 the doubling map collapses to 0 in floating
    point within 53 steps, so the exact transfer-operator route is used.
    A TruncationWarning is issued when the last 20 terms carry 2% or more
    of the total.
    """
    _check_beta(beta, 0.5)
    coef = _coef(phi)
    if not np.any(coef):
        return GreenKubo(0.0, tuple([0.0] * (k_max + 1)), 0.0, "zero", 0, 0)
    if beta == 0.0:
        cov = _gk_doubling(coef, k_max)
        method, m, length = "transfer", 0, 0
    else:
        def work(lo, hi):
            x0 = lsv_batch.invariant_starts(beta, key, hi - lo, lo)
            prods, sums = lsv_batch.lags_kernel(x0, float(beta), coef, int(k_max), int(n))
            return prods, sums

        prods, sums = map_ordered(work, int(samples), workers, min_chunk=8)
        total = float(samples) * n
        mean = float(np.sum(sums)) / total
        cov = np.sum(prods, axis=0) / total - mean * mean
        method, m, length = "monte_carlo", int(samples), int(n)
    sigma2 = float(cov[0] + 2.0 * np.sum(cov[1:]))
    tail = 2.0 * float(np.sum(cov[max(1, k_max - 19):]))
    frac = abs(tail) / abs(sigma2) if sigma2 != 0 else 0.0
    if frac >= 0.02:
        warnings.warn(
            f"Green-Kubo tail (last 20 lags) is {frac:.1%} of sigma^2 at beta = {beta}",
            TruncationWarning, stacklevel=2,
        )
    return GreenKubo(sigma2, tuple(float(c) for c in cov), frac, method, m, length)


# ---------------------------------------------------------------- CLT / KS


def ks_to_normal(z):
    """sup |F_m - Phi| for the standardised values z."""
    z = np.sort(np.asarray(z, dtype=np.float64))
    m = z.size
    if m == 0:
        raise InsufficientDataError("no samples")
    cdf = normal_cdf(z)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


@dataclass(frozen=True)
class CltResult:
    ks: float
    samples: int
    n: int
    scale: float
    degenerate: bool = False
    meta: dict = field(default_factory=dict)


def clt_from_sums(sums, n, sigma2):
    if not sigma2 > 0:
        raise DomainError("sigma^2 must be positive for the CLT diagnostic")
    z = np.asarray(sums) / math.sqrt(sigma2 * n)
    return CltResult(ks_to_normal(z), int(z.size), int(n), math.sqrt(sigma2))


def clt_diagnostic(beta, phi, n, samples, sigma2, key, workers=None):
    """KS distance of S_n / (sigma sqrt n) to N(0, 1) over invariant starts."""
    if not sigma2 > 0:
        raise DomainError("sigma^2 must be positive for the CLT diagnostic")
    sums = birkhoff_sums(beta, phi, n, key, samples, workers)
    return clt_from_sums(sums, n, sigma2)


def quenched_sums(driver, phi, n, samples, key, burn_in=10_000, workers=None):
    """S_n over steps burn_in .. burn_in + n - 1 of the realised sequence."""
    if not isinstance(driver, QuenchedDriver):
        raise ConfigurationError("quenched sums need a QuenchedDriver")
    coef = _coef(phi)
    betas = driver.betas(int(burn_in) + int(n))

    def work(lo, hi):
        x0 = lsv_batch.lebesgue_starts(key, hi - lo, lo)
        return lsv_batch.quenched_sums_kernel(x0, betas, coef, int(burn_in), int(n))

    return map_ordered(work, int(samples), workers)


def quenched_clt_diagnostic(driver, phi, n, samples, key, burn_in=10_000, workers=None):
    """KS of the empirically standardised quenched sums, for one fixed omega.

    Sums are centred by their sample mean (the fibre-wise mean drifts with
    omega) and scaled by the sample standard deviation; scale is
    sd(S_n) / sqrt(n).
    """
    sums = quenched_sums(driver, phi, n, samples, key, burn_in, workers)
    sd = float(np.std(sums, ddof=1)) if sums.size > 1 else 0.0
    if not np.any(_coef(phi)) or sd == 0.0:
        return CltResult(float("nan"), int(sums.size), int(n), 0.0, True,
                         {"burn_in": int(burn_in)})
    z = (sums - sums.mean()) / sd
    return CltResult(ks_to_normal(z), int(sums.size), int(n), sd / math.sqrt(n), False,
                     {"burn_in": int(burn_in), "omega_seed": driver.seed})


# -------------------------------------------------------------- stable laws


@dataclass(frozen=True)
class StableSpec:
    """CF exp(-C |t|^alpha (1 - i k sgn(t) tan(pi alpha / 2))).

    For T_beta: alpha = 1/beta, C = c, k = sgn(phi(0)).
    For a cusp billiard: alpha = eta/(eta - 1), C = sigma**alpha, k = +1.
    """

    alpha: float
    scale: float
    skew: float
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (1.0 < self.alpha < 2.0):
            raise DomainError(f"stable index {self.alpha} outside (1, 2)")

    @property
    def C(self):
        if self.source.get("kind") == "cusp":
            return abs(self.scale) ** self.alpha
        return self.scale

    @classmethod
    def lsv(cls, beta, phi0, h_half):
        if not (0.5 < beta < 1.0):
            raise DomainError("stable law for T_beta needs beta in (1/2, 1)")
        if phi0 == 0:
            raise DomainError("phi(0) = 0 gives no stable limit")
        c = lsv_scale(beta, phi0, h_half)
        return cls(1.0 / beta, c, float(np.sign(phi0)),
                   {"kind": "lsv", "beta": beta, "phi0": phi0, "h_half": h_half})

    @classmethod
    def cusp(cls, eta, sigma, integral=None, total_length=None):
        return cls(eta / (eta - 1.0), float(sigma), 1.0,
                   {"kind": "cusp", "eta": eta, "I_psi": integral, "total_length": total_length})


def lsv_scale(beta, phi0, h_half):
    """c = h(1/2) / (4 (beta/|phi(0)|)^(1/beta)) * Gamma(1 - 1/beta) * cos(pi/(2 beta))."""
    a = 1.0 / beta
    return h_half / (4.0 * (beta / abs(phi0)) ** a) * gamma(1.0 - a) * math.cos(0.5 * math.pi * a)


def stable_cf_theoretical(t, spec):
    t = np.asarray(t, dtype=np.float64)
    a = spec.alpha
    expo = -spec.C * np.abs(t) ** a * (1.0 - 1j * spec.skew * np.sign(t) * math.tan(0.5 * math.pi * a))
    out = np.exp(expo)
    return np.where(t == 0, 1.0 + 0j, out)


@dataclass(frozen=True)
class EmpiricalCF:
    t: tuple
    values: tuple
    stderr: float


def empirical_cf(samples, t_grid):
    """(1/m) sum exp(i t x_j), with standard error 1/sqrt(m) per component.

    Values at -t are the exact conjugates of those at |t|.
    """
    x = np.asarray(samples, dtype=np.float64)
    m = x.size
    if m < MIN_CF_SAMPLES:
        raise InsufficientDataError(f"{m} samples; at least {MIN_CF_SAMPLES} needed")
    vals = []
    for t in t_grid:
        a = abs(float(t)) * x
        v = complex(np.mean(np.cos(a)), np.mean(np.sin(a)))
        vals.append(v.conjugate() if t < 0 else v)
    return EmpiricalCF(tuple(float(t) for t in t_grid), tuple(vals), 1.0 / math.sqrt(m))


@dataclass
class LimitLawReport:
    experiment: str
    metrics: dict
    tolerances: dict
    verdict: str
    samples: int
    provenance: dict = field(default_factory=dict)
    notes: str = ""

    def rows(self):
        out = [("experiment", self.experiment), ("verdict", self.verdict),
               ("samples", self.samples)]
        out += [(f"metric.{k}", v) for k, v in self.metrics.items()]
        out += [(f"tolerance.{k}", v) for k, v in self.tolerances.items()]
        out += [(f"provenance.{k}", v) for k, v in self.provenance.items()]
        if self.notes:
            out.append(("notes", self.notes))
        return out


def compare_cf(values, spec, t_grid, tol):
    """Max modulus discrepancy and the three-valued verdict."""
    cf = empirical_cf(values, t_grid)
    theo = stable_cf_theoretical(np.array(t_grid), spec)
    disc = [abs(e - th) for e, th in zip(cf.values, theo)]
    if cf.stderr > 0.5 * tol:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS if max(disc) < tol else FAIL
    return cf, theo, disc, verdict


def _cf_metrics(cf, theo, disc):
    m = {}
    for t, e, th, d in zip(cf.t, cf.values, theo, disc):
        m[f"cf_re[t={t:g}]"] = e.real
        m[f"cf_im[t={t:g}]"] = e.imag
        m[f"theory_re[t={t:g}]"] = float(th.real)
        m[f"theory_im[t={t:g}]"] = float(th.imag)
        m[f"discrepancy[t={t:g}]"] = float(d)
    m["max_discrepancy"] = float(max(disc))
    m["cf_stderr"] = cf.stderr
    return m


def stable_law_check(beta, phi, n, samples, key, t_grid=CF_POINTS, tol=0.1, h_half=None,
                     workers=None):
    """Compare the CF of S_n / n^beta with the stable law for T_beta."""
    if not (0.5 < beta < 1.0):
        raise DomainError("stable law check needs beta in (1/2, 1)")
    if not phi.mean_removed:
        phi = centered(phi, beta)
    phi0 = phi.value_at_zero
    if phi0 == 0.0:
        raise DomainError("phi(0) = 0: use gaussian_branch_check")
    if h_half is None:
        from .ulam import density_at_half

        h_half = float(density_at_half(beta))
    spec = StableSpec.lsv(beta, phi0, h_half)
    sums = birkhoff_sums(beta, phi, n, key, samples, workers)
    x = sums / float(n) ** beta
    cf, theo, disc, verdict = compare_cf(x, spec, t_grid, tol)
    metrics = {"c": spec.scale, "phi0": phi0, "h_half": h_half, "alpha": spec.alpha}
    metrics.update(_cf_metrics(cf, theo, disc))
    return LimitLawReport("stable", metrics, {"cf": tol}, verdict, int(samples),
                          {"beta": beta, "n": int(n), "observable": phi.name})


def gaussian_branch_check(beta, phi, n, samples, key, tol=0.05, workers=None):
    """phi(0) = 0: KS of S_n / sqrt(n) to a centred Gaussian with fitted variance."""
    if phi.value_at_zero != 0.0:
        raise DomainError("gaussian branch needs phi(0) = 0")
    sums = birkhoff_sums(beta, phi, n, key, samples, workers)
    x = sums / math.sqrt(n)
    s2 = float(np.mean(x * x))
    if s2 == 0.0:
        return LimitLawReport("stable-gaussian", {"sigma2": 0.0}, {"ks": tol}, INCONCLUSIVE,
                              int(samples), notes="degenerate variance")
    ks = ks_to_normal(x / math.sqrt(s2))
    se = 1.36 / math.sqrt(x.size)
    verdict = INCONCLUSIVE if se > tol else (PASS if ks < tol else FAIL)
    return LimitLawReport("stable-gaussian", {"ks": ks, "sigma2": s2}, {"ks": tol}, verdict,
                          int(samples), {"beta": beta, "n": int(n), "observable": phi.name})


def cusp_stable_check(table, psi, n, samples, key, t_grid=CF_POINTS, tol=0.2, workers=None,
                      max_flagged=0.05):
    """Compare the CF of S_n psi / n^(1/alpha) with the cusp stable law."""
    from .billiards.core import observable_sums
    from .billiards.cusp import cusp_alpha, cusp_integral, tip_coordinates

    eta = float(table.meta.get("eta", 0.0))
    if table.meta.get("family") != "cusp":
        raise ConfigurationError("cusp stable check needs a cusp table")
    q1, q2 = tip_coordinates(table)
    f = lambda q, phi: psi(q, phi, table.total_length)
    I = cusp_integral(eta, f, q1, q2)
    alpha = cusp_alpha(eta)
    prov = {"table": table.preset_tag, "n": int(n), "observable": psi.name}
    if abs(I) < 1e-12:
        return LimitLawReport("cusp-stable", {"I_psi": I}, {"cf": tol}, INCONCLUSIVE,
                              int(samples), prov, "precondition violated: I_psi = 0")
    sigma = 2.0 * I / (eta * table.total_length)
    spec = StableSpec.cusp(eta, sigma, I, table.total_length)
    sums, flight, status, resid = observable_sums(table, key, samples, psi.code, n, workers)
    ok = status == 0
    flagged = 1.0 - float(np.mean(ok))
    metrics = {"I_psi": I, "sigma": sigma, "alpha": alpha, "flagged_fraction": flagged,
               "max_residual": float(np.max(resid))}
    kept = sums[ok] / float(n) ** (1.0 / alpha)
    if kept.size < MIN_CF_SAMPLES:
        return LimitLawReport("cusp-stable", metrics, {"cf": tol}, INCONCLUSIVE, int(samples),
                              prov, "too few unflagged orbits")
    cf, theo, disc, verdict = compare_cf(kept, spec, t_grid, tol)
    metrics.update(_cf_metrics(cf, theo, disc))
    if flagged > max_flagged:
        verdict = INCONCLUSIVE
    return LimitLawReport("cusp-stable", metrics, {"cf": tol, "flagged": max_flagged}, verdict,
                          int(samples), prov)


# --------------------------------------------------------------------- LIL


@dataclass(frozen=True)
class LilDiagnostic:
    ratio: float
    per_orbit: tuple
    levels: int
    within_factor_two: bool


def lil_diagnostic(beta, phi, sigma2, key, levels=23, samples=4, tail_levels=6, workers=None):
    """limsup |S_n| / sqrt(2 n log log n) over dyadic n, compared with sigma.

    The limsup is estimated by the maximum over the last ``tail_levels``
    dyadic levels of each orbit; never used as a pass/fail gate.
    """
    coef = _coef(phi)

    def work(lo, hi):
        x0 = lsv_batch.invariant_starts(beta, key, hi - lo, lo)
        return lsv_batch.dyadic_kernel(x0, float(beta), coef, int(levels))

    s = map_ordered(work, int(samples), workers, min_chunk=1)
    n = 2.0 ** np.arange(1, levels + 1)
    scale = np.sqrt(2.0 * n * np.log(np.log(n)).clip(min=1e-12))
    r = np.abs(s[:, -tail_levels:]) / scale[-tail_levels:]
    per = np.max(r, axis=1)
    ratio = float(np.mean(per) / math.sqrt(sigma2))
    return LilDiagnostic(ratio, tuple(float(v) for v in per), int(levels),
                         bool(0.5 <= ratio <= 2.0))
