"""Batch orbit kernels for the LSV map.

Each kernel runs many independent orbits and returns one result per start.
The numba versions loop start by start; the numpy versions advance all
starts together one time step at a time.  :func:`_backend_pick` chooses
according to ``CHAOSLAB_DISABLE_JIT``.

Birkhoff sums run over i = 0..n-1, i.e. S_n = phi(x) + ... + phi(T^{n-1} x),
with Kahan compensation in both backends.
"""
import numpy as np

from . import rng
from ._jit import USE_JIT, jit
from .errors import DomainError
from .maps import step
from .observables import evaluate, evaluate_array

RETURN_CAP = 10**8


def _np_step(x, beta):
    left = x * (1.0 + (2.0 * x) ** beta)
    return np.clip(np.where(x <= 0.5, left, 2.0 * x - 1.0), 0.0, 1.0)


# ---------------------------------------------------------------- sums


@jit
def _sums_nb(x0s, beta, coef, n):
    out = np.empty(x0s.shape[0])
    for i in range(x0s.shape[0]):
        x = x0s[i]
        s = 0.0
        comp = 0.0
        for _ in range(n):
            y = evaluate(coef, x) - comp
            t = s + y
            comp = (t - s) - y
            s = t
            x = step(x, beta)
        out[i] = s
    return out


def _sums_np(x0s, beta, coef, n):
    x = np.array(x0s, dtype=np.float64)
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    for _ in range(n):
        y = evaluate_array(coef, x) - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = _np_step(x, beta)
    return s


@jit
def _quenched_nb(x0s, betas, coef, burn, n):
    out = np.empty(x0s.shape[0])
    for i in range(x0s.shape[0]):
        x = x0s[i]
        for k in range(burn):
            x = step(x, betas[k])
        s = 0.0
        comp = 0.0
        for k in range(burn, burn + n):
            y = evaluate(coef, x) - comp
            t = s + y
            comp = (t - s) - y
            s = t
            x = step(x, betas[k])
        out[i] = s
    return out


def _quenched_np(x0s, betas, coef, burn, n):
    x = np.array(x0s, dtype=np.float64)
    for k in range(burn):
        x = _np_step(x, betas[k])
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    for k in range(burn, burn + n):
        y = evaluate_array(coef, x) - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = _np_step(x, betas[k])
    return s


# ------------------------------------------------------ large deviations


@jit
def _ld_nb(x0s, beta, coef, n_first, n_last):
    """|S_N / N| and max over N <= n <= n_last of |S_n / n|."""
    m = x0s.shape[0]
    at = np.empty(m)
    sup = np.empty(m)
    for i in range(m):
        x = x0s[i]
        s = 0.0
        comp = 0.0
        best = 0.0
        for k in range(1, n_last + 1):
            y = evaluate(coef, x) - comp
            t = s + y
            comp = (t - s) - y
            s = t
            x = step(x, beta)
            if k >= n_first:
                v = abs(s) / k
                if k == n_first:
                    at[i] = v
                    best = v
                elif v > best:
                    best = v
        sup[i] = best
    return at, sup


def _ld_np(x0s, beta, coef, n_first, n_last):
    x = np.array(x0s, dtype=np.float64)
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    at = np.zeros_like(x)
    best = np.zeros_like(x)
    for k in range(1, n_last + 1):
        y = evaluate_array(coef, x) - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = _np_step(x, beta)
        if k >= n_first:
            v = np.abs(s) / k
            if k == n_first:
                at = v.copy()
                best = v.copy()
            else:
                best = np.maximum(best, v)
    return at, best


# ------------------------------------------------------------ returns


@jit
def _returns_nb(x0s, beta, cap):
    """First k >= 1 with T^k x in [1/2, 1]; cap + 1 marks a censored start."""
    out = np.empty(x0s.shape[0], dtype=np.int64)
    for i in range(x0s.shape[0]):
        x = step(x0s[i], beta)
        k = 1
        while x < 0.5 and k <= cap:
            x = step(x, beta)
            k += 1
        out[i] = k
    return out


def _returns_np(x0s, beta, cap):
    x = _np_step(np.array(x0s, dtype=np.float64), beta)
    out = np.ones(x.shape, dtype=np.int64)
    live = x < 0.5
    k = 1
    while np.any(live) and k <= cap:
        idx = np.nonzero(live)[0]
        x[idx] = _np_step(x[idx], beta)
        k += 1
        out[idx] = k
        live[idx] = x[idx] < 0.5
    return out


# ------------------------------------------------------- correlations


@jit
def _lags_nb(x0s, beta, coef, kmax, length):
    """Per start: sum_t phi(x_t) phi(x_{t+k}) over t < length, k = 0..kmax.

    Returns (products[m, kmax+1], sums[m]) where sums is sum_t phi(x_t) over
    the same t range.
    """
    m = x0s.shape[0]
    prods = np.zeros((m, kmax + 1))
    sums = np.zeros(m)
    buf = np.empty(length + kmax)
    for i in range(m):
        x = x0s[i]
        for t in range(length + kmax):
            buf[t] = evaluate(coef, x)
            x = step(x, beta)
        for t in range(length):
            sums[i] += buf[t]
            a = buf[t]
            for k in range(kmax + 1):
                prods[i, k] += a * buf[t + k]
    return prods, sums


def _lags_np(x0s, beta, coef, kmax, length):
    x = np.array(x0s, dtype=np.float64)
    m = x.shape[0]
    buf = np.empty((length + kmax, m))
    for t in range(length + kmax):
        buf[t] = evaluate_array(coef, x)
        x = _np_step(x, beta)
    prods = np.zeros((m, kmax + 1))
    for k in range(kmax + 1):
        prods[:, k] = np.sum(buf[:length] * buf[k : length + k], axis=0)
    return prods, np.sum(buf[:length], axis=0)


# ------------------------------------------------------------- dyadic


@jit
def _dyadic_nb(x0s, beta, coef, levels):
    """S_n at n = 2, 4, ..., 2**levels."""
    m = x0s.shape[0]
    out = np.empty((m, levels))
    for i in range(m):
        x = x0s[i]
        s = 0.0
        comp = 0.0
        nxt = 2
        lv = 0
        for k in range(1, 2**levels + 1):
            y = evaluate(coef, x) - comp
            t = s + y
            comp = (t - s) - y
            s = t
            x = step(x, beta)
            if k == nxt:
                out[i, lv] = s
                lv += 1
                nxt *= 2
    return out


def _dyadic_np(x0s, beta, coef, levels):
    x = np.array(x0s, dtype=np.float64)
    s = np.zeros_like(x)
    comp = np.zeros_like(x)
    out = np.empty((x.shape[0], levels))
    nxt, lv = 2, 0
    for k in range(1, 2**levels + 1):
        y = evaluate_array(coef, x) - comp
        t = s + y
        comp = (t - s) - y
        s = t
        x = _np_step(x, beta)
        if k == nxt:
            out[:, lv] = s
            lv += 1
            nxt *= 2
    return out


# ----------------------------------------------------------- recurrence


@jit
def _count_nb(x0s, beta, z, r, window_end):
    """Visits of T^i x to |x - z| < r, binned by window of the iterate index."""
    m = x0s.shape[0]
    nw = window_end.shape[0]
    counts = np.zeros((m, nw), dtype=np.int64)
    n = window_end[nw - 1]
    for i in range(m):
        x = x0s[i]
        w = 0
        for it in range(n):
            while it >= window_end[w]:
                w += 1
            if abs(x - z) < r:
                counts[i, w] += 1
            x = step(x, beta)
    return counts


def _count_np(x0s, beta, z, r, window_end):
    x = np.array(x0s, dtype=np.float64)
    counts = np.zeros((x.shape[0], window_end.shape[0]), dtype=np.int64)
    w = 0
    for it in range(int(window_end[-1])):
        while it >= window_end[w]:
            w += 1
        counts[:, w] += np.abs(x - z) < r
        x = _np_step(x, beta)
    return counts


@jit
def _hit_nb(x0s, beta, z, r, cap):
    """First n >= 1 with |T^n x - z| < r; cap + 1 when censored."""
    out = np.empty(x0s.shape[0], dtype=np.int64)
    for i in range(x0s.shape[0]):
        x = x0s[i]
        hit = cap + 1
        for k in range(1, cap + 1):
            x = step(x, beta)
            if abs(x - z) < r:
                hit = k
                break
        out[i] = hit
    return out


def _hit_np(x0s, beta, z, r, cap):
    x = np.array(x0s, dtype=np.float64)
    out = np.full(x.shape, cap + 1, dtype=np.int64)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, cap + 1):
        idx = np.nonzero(live)[0]
        if idx.size == 0:
            break
        x[idx] = _np_step(x[idx], beta)
        hit = np.abs(x[idx] - z) < r
        out[idx[hit]] = k
        live[idx[hit]] = False
    return out


def _backend_pick(nb, np_):
    return nb if USE_JIT else np_


birkhoff_sums_kernel = _backend_pick(_sums_nb, _sums_np)
quenched_sums_kernel = _backend_pick(_quenched_nb, _quenched_np)
ld_kernel = _backend_pick(_ld_nb, _ld_np)
returns_kernel = _backend_pick(_returns_nb, _returns_np)
lags_kernel = _backend_pick(_lags_nb, _lags_np)
dyadic_kernel = _backend_pick(_dyadic_nb, _dyadic_np)
count_kernel = _backend_pick(_count_nb, _count_np)
hit_kernel = _backend_pick(_hit_nb, _hit_np)


# -------------------------------------------------------------- starts


def lebesgue_starts(key, count, start=0, lo=0.0, hi=1.0):
    """Uniform starts on [lo, hi); sample i uses key seed_split(key, i)."""
    keys = rng.stream_keys(key, count, start)
    return lo + (hi - lo) * rng.uniform_array(keys, 0)


def invariant_starts(beta, key, count, start=0, bins=None):
    """Starts distributed by the invariant measure of T_beta."""
    from .induced import DEFAULT_RETURN_BINS, induced_measure

    meas = induced_measure(float(beta), bins or DEFAULT_RETURN_BINS)
    keys = rng.stream_keys(key, count, start)
    return meas.sample(rng.uniform_array(keys, 0), rng.uniform_array(keys, 1))


def check_starts(x0s):
    x0s = np.ascontiguousarray(x0s, dtype=np.float64)
    if x0s.size and (np.min(x0s) < 0.0 or np.max(x0s) > 1.0):
        raise DomainError("starting points must lie in [0, 1]")
    return x0s
