"""Experiment dispatch, persistence and exit statuses.

Every experiment returns a :class:`RunResult`; :func:`run` writes
``results.csv`` (header row first), ``report.txt`` (flat key = value) and
``manifest.txt``.  Result and report files depend only on the config and
the code version, never on the worker count or the wall clock.
"""
import csv
import io
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import __version__, limits, rng
from .._jit import backend
from ..errors import ChaosLabError, TruncationWarning
from ..limits import FAIL, INCONCLUSIVE, PASS
from ..observables import billiard_preset, interval_preset

EXIT = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}
EXIT_ERROR = 3
# below this many samples a statistical verdict has no power
MIN_POWER_SAMPLES = 1000
STATISTICAL = ("return-tail", "ldp", "max-ldp", "poisson", "hitting", "clt",
               "quenched-clt", "stable", "cusp-stable", "mean-free-path")

# stream tags: the key for role k is derive(seed, k)
TAG_STARTS, TAG_AUX, TAG_HOLE, TAG_BOOT = 1, 2, 3, 4


@dataclass
class RunResult:
    columns: tuple
    rows: list
    verdict: str
    metrics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def exit_code(self):
        return EXIT[self.verdict]


def _key(config, tag):
    return rng.derive(int(config["seed"]), tag)


def _workers(config):
    return config.get("workers")


def _table(config):
    from ..billiards import build_preset

    return build_preset(config["system"], **config.table_params())


def _interval_observable(config, beta):
    name = config["observable"]
    if name == "vanishing_at_zero":
        return limits.vanishing_observable(beta)
    phi = interval_preset(name)
    if name in ("zero",):
        return phi
    return limits.centered(phi, beta)


def _billiard_observable(config):
    name = config.get("observable")
    return billiard_preset(name if name in ("cos_q", "sin_q", "cos_2q") else "cos_q")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


# ----------------------------------------------------------- experiments


def _simulate(config):
    n = int(config["n"])
    if config["system"] == "lsv":
        from ..maps import orbit_array

        beta = float(config["beta"]) if config.get("beta") is not None else 0.0
        xs = orbit_array(float(config["x0"]), beta, n)
        return RunResult(("step", "x"), [(i, x) for i, x in enumerate(xs)], PASS,
                         {"beta": beta, "x0": config["x0"]})
    from ..billiards.core import PhasePoint, billiard_orbit

    table = _table(config)
    orbit = billiard_orbit(table, PhasePoint(float(config["q0"]), float(config["phi0"])), n)
    rows = [(i, q, p, orbit.tau[i - 1] if i else 0.0)
            for i, (q, p) in enumerate(zip(orbit.q, orbit.phi))]
    verdict = PASS if orbit.flag is None else INCONCLUSIVE
    res = RunResult(("step", "q", "phi", "tau"), rows, verdict,
                    {"steps": orbit.steps, "max_residual": orbit.max_residual},
                    counts={"flagged": int(orbit.flag is not None)})
    if orbit.flag:
        res.notes.append(f"orbit stopped: {orbit.flag}")
    return res


def _density(config):
    from ..ulam import solved_model

    beta = float(config["beta"])
    bins = int(config["bins"])
    model = solved_model(beta, bins)
    h = model.density
    edges = model.edges
    rows = [(edges[i], edges[i + 1], h[i]) for i in range(bins)]
    metrics = {"residual": model.residual, "iterations": model.iterations}
    if beta == 0.0:
        tol = config.get("tolerance", 1e-8)
        dev = float(np.max(np.abs(h - 1.0)))
        metrics["max_deviation_from_uniform"] = dev
        return RunResult(("bin_lo", "bin_hi", "density"), rows, PASS if dev < tol else FAIL,
                         metrics, {"uniform": tol})
    tol = config.get("tolerance", 1.5)
    inside = (edges[:-1] >= 2.0**-10) & (edges[1:] <= 2.0**-4)
    res = RunResult(("bin_lo", "bin_hi", "density"), rows, INCONCLUSIVE, metrics,
                    {"max_min_ratio": tol})
    if inside.sum() < 2:
        res.notes.append("bins too coarse to resolve [2^-10, 2^-4]")
        return res
    mid = model.midpoints[inside]
    w = h[inside] * mid**beta
    ratio = float(w.max() / w.min())
    metrics["scaled_ratio"] = ratio
    res.verdict = PASS if ratio < tol else FAIL
    return res


def _return_tail(config):
    beta = float(config["beta"])
    grid = tuple(int(v) for v in config["n_grid"])
    m = int(config["samples"])
    r = limits.return_times(beta, m, _key(config, TAG_STARTS), workers=_workers(config))
    censored = int(np.sum(r > limits.lsv_batch.RETURN_CAP))
    probs = [float(np.mean(r > N)) for N in grid]
    exact = limits.return_tail_exact(beta, grid)
    rows = [(N, p, e, m) for N, p, e in zip(grid, probs, exact)]
    res = RunResult(("N", "probability", "exact", "samples"), rows, INCONCLUSIVE,
                    counts={"censored": censored})
    if beta == 0.0:
        tol = config.get("tolerance", 0.01)
        k = np.arange(1, 21)
        pmf = np.bincount(np.minimum(r, 21), minlength=22)[1:21] / m
        dev = float(np.max(np.abs(pmf - 0.5**k)))
        res.metrics.update({"pmf_max_deviation": dev})
        res.tolerances["pmf"] = tol
        res.verdict = PASS if dev < tol else FAIL
        return res
    tol = config.get("tolerance", 0.3)
    fit = limits.exponent_fit(limits.TailCurve(grid, tuple(probs), tuple([m] * len(grid))))
    target = -1.0 / beta
    res.metrics.update({"slope": fit.slope, "stderr": fit.stderr, "r2": fit.r2,
                        "expected_slope": target, "floored_points": sum(fit.floored)})
    res.tolerances["slope"] = tol
    if fit.inconclusive:
        res.notes.append("fit R^2 below 0.8")
    else:
        res.verdict = PASS if abs(fit.slope - target) <= tol else FAIL
    return res


def _ld_common(config):
    beta = float(config["beta"])
    phi = _interval_observable(config, beta)
    eps = config.get("epsilon")
    if eps is None:
        eps = float(config["epsilon_fraction"]) * phi.sup_norm()
    return beta, phi, float(eps)


def _slope_verdict(res, curve, beta, tol):
    fit = limits.exponent_fit(curve)
    res.metrics.update({"slope": fit.slope, "stderr": fit.stderr, "r2": fit.r2,
                        "floored_points": sum(fit.floored)})
    res.tolerances["slope"] = tol
    if beta == 0.0:
        res.notes.append("beta = 0 has exponential, not polynomial, tails")
        return INCONCLUSIVE
    target = -(1.0 / beta - 1.0)
    res.metrics["expected_slope"] = target
    if fit.inconclusive:
        res.notes.append("fit R^2 below 0.8")
        return INCONCLUSIVE
    return PASS if abs(fit.slope - target) <= tol else FAIL


def _ldp(config):
    beta, phi, eps = _ld_common(config)
    grid = tuple(int(v) for v in config["n_grid"])
    m = int(config["samples"])
    curve = limits.ld_tail(beta, phi, eps, grid, m, _key(config, TAG_STARTS), _workers(config))
    rows = [(n, p, m) for n, p in zip(grid, curve.probabilities)]
    res = RunResult(("n", "probability", "samples"), rows, INCONCLUSIVE,
                    {"epsilon": eps, "observable": phi.name})
    res.verdict = _slope_verdict(res, curve, beta, config.get("tolerance", 0.5))
    return res


def _max_ldp(config):
    beta, phi, eps = _ld_common(config)
    grid = tuple(int(v) for v in config["n_grid"])
    m = int(config["samples"])
    h = int(config["horizon_factor"])
    curve, raw = limits.max_ld_tail(beta, phi, eps, grid, m, _key(config, TAG_STARTS), h,
                                    _workers(config), values=True)
    ld = [float(np.mean(at >= eps)) for at, _ in raw]
    pointwise = all(bool(np.all(sup >= at)) for at, sup in raw)
    rows = [(N, p, q, m) for N, p, q in zip(grid, curve.probabilities, ld)]
    res = RunResult(("N", "max_probability", "ld_probability", "samples"), rows, INCONCLUSIVE,
                    {"epsilon": eps, "observable": phi.name, "horizon_factor": h,
                     "dominates_pointwise": pointwise})
    verdict = _slope_verdict(res, curve, beta, config.get("tolerance", 0.5))
    res.verdict = FAIL if not pointwise else verdict
    return res


def _hole_center(config, table):
    from ..recurrence import random_boundary_strip

    c = config.get("hole.center")
    if c is not None:
        return float(c)
    r = max(config["hole.radii"]) if config.experiment == "poisson" else config["hole.radius"]
    return random_boundary_strip(table, r, _key(config, TAG_HOLE)).center


def _holes(config, radii):
    """(hole, counts-source) per radius; billiard, interval or Bernoulli."""
    from .. import recurrence as rec

    system = config["system"]
    if system == "bernoulli":
        return [("bernoulli", float(r), None) for r in radii]
    if system == "lsv":
        beta = float(config["beta"]) if config.get("beta") is not None else 0.0
        z = config.get("hole.center")
        if z is None:
            z = float(limits.lsv_batch.invariant_starts(beta, _key(config, TAG_HOLE), 1)[0])
        return [("lsv", rec.interval_ball(beta, float(z), float(r)), beta) for r in radii]
    table = _table(config)
    q = _hole_center(config, table)
    return [("billiard", rec.boundary_strip(table, q, float(r)), table) for r in radii]


def _poisson(config):
    from .. import recurrence as rec

    radii = tuple(float(r) for r in config["hole.radii"])
    edges = rec.window_edges(float(config["T"]), int(config["windows"]))
    m = int(config["samples"])
    key = _key(config, TAG_STARTS)
    rows, tv, se, flagged = [], [], [], 0
    measures = []
    for kind, hole, ctx in _holes(config, radii):
        if kind == "bernoulli":
            mu = hole
            counts = rec.bernoulli_counts(mu, edges, key, m)
            status = np.zeros(m, dtype=np.int64)
        elif kind == "lsv":
            mu = hole.measure
            counts, status = rec.interval_counts(ctx, hole, edges, key, m, _workers(config))
        else:
            mu = hole.measure
            counts, status = rec.billiard_counts(ctx, hole, edges, key, m, _workers(config))
        measures.append(mu)
        ok = status == 0
        flagged += int(np.sum(~ok))
        kept = counts[ok]
        dist = rec.empirical_tv_to_poisson(kept, edges, int(config["bootstrap"]),
                                           _key(config, TAG_BOOT))
        tv.append(dist.max_window)
        se.append(dist.max_window_se)
        lengths = np.diff(edges)
        r = radii[len(tv) - 1]
        for j in range(kept.shape[1]):
            freq = np.bincount(kept[:, j], minlength=dist.support + 1)
            for c in range(dist.support + 1):
                rows.append((r, j + 1, c, freq[c] / kept.shape[0],
                             float(rec.poisson_pmf(c, lengths[j]))))
    tol = config.get("tolerance", 0.05)
    order = np.argsort(radii)[::-1]
    tv_sorted = [tv[i] for i in order]
    se_sorted = [se[i] for i in order]
    inversions, excess = 0, False
    for a in range(len(order) - 1):
        d = tv_sorted[a + 1] - tv_sorted[a]
        if d > 0:
            inversions += 1
            if d > math.hypot(se_sorted[a], se_sorted[a + 1]):
                excess = True
    monotone = inversions == 0 or (inversions == 1 and not excess)
    metrics = {f"tv[r={r:g}]": v for r, v in zip(radii, tv)}
    metrics.update({f"tv_se[r={r:g}]": v for r, v in zip(radii, se)})
    metrics.update({f"measure[r={r:g}]": v for r, v in zip(radii, measures)})
    metrics.update({"inversions": inversions, "monotone": monotone})
    res = RunResult(("radius", "window", "count", "empirical", "poisson"), rows, PASS, metrics,
                    {"tv_smallest_radius": tol}, {"flagged": flagged})
    small = tv[int(np.argmin(radii))]
    verdict = PASS if (small < tol and monotone) else FAIL
    if len(radii) >= 3 and max(radii) / min(radii) >= 10.0 - 1e-9:
        fit = rec.convergence_rate_fit(radii, tv, m)
        metrics.update({"rate_exponent": fit.exponent, "rate_stderr": fit.stderr,
                        "rate_r2": fit.r2, "rate_inconclusive": fit.inconclusive})
        if fit.inconclusive:
            res.notes.append("convergence-rate fit inconclusive (R^2 < 0.8)")
        elif fit.exponent <= 0:
            verdict = FAIL
    else:
        res.notes.append("radii span less than a decade; no rate fit")
    res.verdict = verdict
    return res


def _hitting(config):
    from .. import recurrence as rec

    r = float(config["hole.radius"])
    m = int(config["samples"])
    key = _key(config, TAG_STARTS)
    kind, hole, ctx = _holes(config, (r,))[0]
    mu = hole if kind == "bernoulli" else hole.measure
    horizon = int(math.ceil(float(config["hole.horizon"]) / mu))
    if kind == "bernoulli":
        times, status = rec.bernoulli_hitting(mu, key, m, horizon), np.zeros(m, dtype=np.int64)
    elif kind == "lsv":
        times, status = rec.interval_hitting(ctx, hole, key, m, horizon, _workers(config))
    else:
        times, status = rec.billiard_hitting(ctx, hole, key, m, horizon, _workers(config))
    ok = status == 0
    s = rec.hitting_summary(times[ok], mu, horizon)
    tol = config.get("tolerance", 0.05)
    scaled = times[ok] * mu
    grid = np.round(np.arange(0, 51) * 0.1, 10)
    rows = [(t, float(np.mean(scaled > t)), math.exp(-t)) for t in grid]
    metrics = {"ks": s.ks, "survival_ln2": s.survival_ln2, "measure": mu, "horizon": horizon}
    verdict = PASS if s.ks < tol else FAIL
    tols = {"ks": tol}
    if kind == "bernoulli":
        tols["survival_ln2"] = 0.02
        if abs(s.survival_ln2 - 0.5) > 0.02:
            verdict = FAIL
    return RunResult(("t", "empirical_survival", "exponential"), rows, verdict, metrics, tols,
                     {"censored": int(round(s.censored_fraction * s.samples)),
                      "flagged": int(np.sum(~ok))})


def _normal_rows(z):
    from ..special import normal_cdf

    z = np.sort(z)
    grid = np.round(np.arange(-40, 41) * 0.1, 10)
    emp = np.searchsorted(z, grid, side="right") / z.size
    return [(g, e, float(normal_cdf(g))) for g, e in zip(grid, emp)]


def _clt(config):
    beta = float(config["beta"])
    phi = _interval_observable(config, beta)
    n, m = int(config["n"]), int(config["samples"])
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        gk = limits.green_kubo_sigma2(beta, phi, _key(config, TAG_AUX), int(config["k_max"]),
                                      workers=_workers(config))
    notes += [str(w.message) for w in caught if issubclass(w.category, TruncationWarning)]
    sums = limits.birkhoff_sums(beta, phi, n, _key(config, TAG_STARTS), m, _workers(config))
    r = limits.clt_from_sums(sums, n, gk.sigma2)
    tol = config.get("tolerance", 0.03)
    z = sums / math.sqrt(gk.sigma2 * n)
    return RunResult(("z", "empirical_cdf", "normal_cdf"), _normal_rows(z),
                     PASS if r.ks < tol else FAIL,
                     {"ks": r.ks, "sigma2": gk.sigma2, "gk_method": gk.method,
                      "gk_tail_fraction": gk.tail_fraction, "observable": phi.name},
                     {"ks": tol}, notes=notes)


def _quenched(config):
    from ..maps import QuenchedDriver

    phi = interval_preset(config["observable"])
    n, m = int(config["n"]), int(config["samples"])
    tol = config.get("tolerance", 0.05)
    stol = float(config["scale_tolerance"])
    rows, scales, verdict = [], [], PASS
    for s in config["omega_seeds"]:
        d = QuenchedDriver.uniform(config["beta_lo"], config["beta_hi"], int(s))
        r = limits.quenched_clt_diagnostic(d, phi, n, m, _key(config, TAG_STARTS),
                                           int(config["burn_in"]), _workers(config))
        rows.append((int(s), r.ks, r.scale, r.samples))
        scales.append(r.scale)
        if r.degenerate:
            verdict = INCONCLUSIVE if verdict == PASS else verdict
        elif r.ks >= tol:
            verdict = FAIL
    spread = (max(scales) - min(scales)) / max(scales) if max(scales) > 0 else float("nan")
    if len(scales) > 1 and not spread <= stol and verdict == PASS:
        verdict = FAIL
    return RunResult(("omega_seed", "ks", "scale", "samples"), rows, verdict,
                     {"scale_spread": spread}, {"ks": tol, "scale": stol})


def _cf_rows(metrics, t_grid):
    return [(t, metrics[f"cf_re[t={t:g}]"], metrics[f"cf_im[t={t:g}]"],
             metrics[f"theory_re[t={t:g}]"], metrics[f"theory_im[t={t:g}]"],
             metrics[f"discrepancy[t={t:g}]"]) for t in t_grid]


CF_COLUMNS = ("t", "cf_re", "cf_im", "theory_re", "theory_im", "discrepancy")


def _stable(config):
    beta = float(config["beta"])
    phi = _interval_observable(config, beta)
    n, m = int(config["n"]), int(config["samples"])
    t_grid = tuple(config["t_grid"])
    key = _key(config, TAG_STARTS)
    if phi.value_at_zero == 0.0:
        rep = limits.gaussian_branch_check(beta, phi, n, m, key, config.get("tolerance", 0.05),
                                           _workers(config))
        return RunResult(("quantity", "value"), sorted(rep.metrics.items()), rep.verdict,
                         rep.metrics, rep.tolerances, notes=[rep.notes] if rep.notes else [])
    rep = limits.stable_law_check(beta, phi, n, m, key, t_grid, config.get("tolerance", 0.1),
                                  workers=_workers(config))
    return RunResult(CF_COLUMNS, _cf_rows(rep.metrics, t_grid), rep.verdict, rep.metrics,
                     rep.tolerances)


def _cusp_stable(config):
    from ..billiards.cusp import cusp_integral, cusp_integral_riemann, tip_coordinates

    table = _table(config)
    psi = _billiard_observable(config)
    n, m = int(config["n"]), int(config["samples"])
    t_grid = tuple(config["t_grid"])
    rep = limits.cusp_stable_check(table, psi, n, m, _key(config, TAG_STARTS), t_grid,
                                   config.get("tolerance", 0.2), _workers(config))
    eta = float(table.meta["eta"])
    q1, q2 = tip_coordinates(table)
    f = lambda q, p: psi(q, p, table.total_length)
    rep.metrics["quadrature_vs_riemann"] = abs(cusp_integral(eta, f, q1, q2)
                                               - cusp_integral_riemann(eta, f, q1, q2))
    rows = _cf_rows(rep.metrics, t_grid) if "max_discrepancy" in rep.metrics else []
    flagged = int(round(rep.metrics.get("flagged_fraction", 0.0) * m))
    return RunResult(CF_COLUMNS, rows, rep.verdict, rep.metrics, rep.tolerances,
                     {"flagged": flagged}, [rep.notes] if rep.notes else [])


def _mean_free_path(config):
    from ..billiards.core import free_paths

    table = _table(config)
    n, m = int(config["n"]), int(config["samples"])
    flight, steps, status, worst = free_paths(table, _key(config, TAG_STARTS), m, n,
                                              _workers(config))
    ok = status == 0
    est = float(np.sum(flight[ok]) / np.sum(steps[ok]))
    theory = table.mean_free_path()
    rel = abs(est / theory - 1.0)
    tol = config.get("tolerance", 0.02)
    rows = [("estimate", est), ("theory", theory), ("relative_error", rel),
            ("collisions", int(np.sum(steps[ok]))), ("max_residual", float(np.max(worst)))]
    return RunResult(("quantity", "value"), rows, PASS if rel < tol else FAIL,
                     {"estimate": est, "theory": theory, "relative_error": rel,
                      "max_residual": float(np.max(worst))}, {"relative": tol},
                     {"flagged": int(np.sum(~ok))})


EXPERIMENTS = {
    "simulate": _simulate,
    "density": _density,
    "return-tail": _return_tail,
    "ldp": _ldp,
    "max-ldp": _max_ldp,
    "poisson": _poisson,
    "hitting": _hitting,
    "clt": _clt,
    "quenched-clt": _quenched,
    "stable": _stable,
    "cusp-stable": _cusp_stable,
    "mean-free-path": _mean_free_path,
}


# ----------------------------------------------------------- persistence


def execute(config):
    """Run the experiment in memory; low-power configs short-circuit."""
    kind = config.experiment
    if kind in STATISTICAL and int(config["samples"]) < MIN_POWER_SAMPLES:
        return RunResult(("quantity", "value"), [], INCONCLUSIVE,
                         notes=[f"power too low: {config['samples']} samples, "
                                f"at least {MIN_POWER_SAMPLES} needed"])
    return EXPERIMENTS[kind](config)


def results_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def report_text(config, result):
    lines = [("experiment", config.experiment), ("verdict", result.verdict),
             ("config_hash", config.hash()), ("version", __version__),
             ("seed", config["seed"]), ("samples", config.get("samples", ""))]
    lines += [(f"metric.{k}", v) for k, v in sorted(result.metrics.items())]
    lines += [(f"tolerance.{k}", v) for k, v in sorted(result.tolerances.items())]
    lines += [(f"count.{k}", v) for k, v in sorted(result.counts.items())]
    lines += [(f"note.{i}", v) for i, v in enumerate(result.notes)]
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in lines)


def manifest_text(config, result, wall, workers):
    seed = int(config["seed"])
    lines = [
        ("config_hash", config.hash()),
        ("version", __version__),
        ("backend", backend()),
        ("wall_clock_s", f"{wall:.3f}"),
        ("workers", workers),
        ("seed", seed),
        ("seed_derivation", "sample i of role k uses seed_split(derive(seed, k), i)"),
        ("seed.starts", rng.derive(seed, TAG_STARTS)),
        ("seed.aux", rng.derive(seed, TAG_AUX)),
        ("seed.hole", rng.derive(seed, TAG_HOLE)),
        ("seed.bootstrap", rng.derive(seed, TAG_BOOT)),
        ("censored", result.counts.get("censored", 0)),
        ("flagged", result.counts.get("flagged", 0)),
        ("verdict", result.verdict),
    ]
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in lines)


def run(config, out_dir):
    """Execute and write the three files; returns (result, exit code)."""
    from ..parallel import default_workers

    t0 = time.perf_counter()
    result = execute(config)
    wall = time.perf_counter() - t0
    os.makedirs(out_dir, exist_ok=True)
    workers = config.get("workers") or default_workers()
    files = {
        "results.csv": results_csv(result),
        "report.txt": report_text(config, result),
        "manifest.txt": manifest_text(config, result, wall, workers),
    }
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return result, result.exit_code


def run_safely(config, out_dir):
    """As :func:`run`, mapping library errors to exit status 3."""
    try:
        return run(config, out_dir)
    except ChaosLabError as exc:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(f"experiment = {config.experiment}\nverdict = error\n"
                     f"error = {type(exc).__name__}: {exc}\n")
        return exc, EXIT_ERROR
