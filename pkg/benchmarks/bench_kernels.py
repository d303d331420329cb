#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Both variants are imported directly, so the CHAOSLAB_DISABLE_JIT flag does
not matter here.  The first numba call is timed separately as compile time.

Usage:
    python benchmarks/bench_kernels.py [--starts N] [--steps S] [--repeat R]
"""
import argparse
import time

import numpy as np

from chaoslab import lsv_batch as lb
from chaoslab.billiards import build_preset
from chaoslab.billiards import dynamics as dyn
from chaoslab.billiards.core import max_flight, sample_invariant
from chaoslab.billiards.vectorized import map_batch_np
from chaoslab.observables import interval_preset


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(name, nb, np_, repeat):
    t0 = time.perf_counter()
    nb()
    first = time.perf_counter() - t0
    t_nb = best_of(nb, repeat)
    t_np = best_of(np_, repeat)
    print(f"{name:<24} numba {t_nb * 1e3:9.2f} ms  numpy {t_np * 1e3:9.2f} ms  "
          f"speedup {t_np / t_nb:7.1f}x  (first call {first:.2f} s)")
    return t_nb, t_np


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--starts", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    beta = 0.6
    x0 = lb.lebesgue_starts(12345, args.starts)
    coef = interval_preset("trig_kink").array
    n = args.steps
    print(f"{args.starts} starts, {n} steps, best of {args.repeat}")

    bench("birkhoff sums", lambda: lb._sums_nb(x0, beta, coef, n),
          lambda: lb._sums_np(x0, beta, coef, n), args.repeat)
    bench("ld (n..10n)", lambda: lb._ld_nb(x0, beta, coef, n // 10, n),
          lambda: lb._ld_np(x0, beta, coef, n // 10, n), args.repeat)
    betas = np.full(n + 100, 0.3)
    bench("quenched sums", lambda: lb._quenched_nb(x0, betas, coef, 100, n),
          lambda: lb._quenched_np(x0, betas, coef, 100, n), args.repeat)
    y0 = lb.lebesgue_starts(54321, args.starts, 0, 0.5, 1.0)
    bench("return times", lambda: lb._returns_nb(y0, beta, 10**6),
          lambda: lb._returns_np(y0, beta, 10**6), args.repeat)

    table = build_preset("stadium")
    q, phi = sample_invariant(table, 99, args.starts * 50)
    mf = max_flight(table)
    args_t = (table.kinds, table.params, table.lengths, table.offsets)
    bench("stadium map step", lambda: dyn.map_batch_kernel(*args_t, q, phi, mf),
          lambda: map_batch_np(table, q, phi, mf), args.repeat)


if __name__ == "__main__":
    main()
