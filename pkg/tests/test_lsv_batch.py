import numpy as np
import pytest

from chaoslab import lsv_batch as lb
from chaoslab.errors import DomainError
from chaoslab.maps import QuenchedDriver, lsv_orbit, orbit_array
from chaoslab.observables import evaluate_array, interval_preset

COEF = interval_preset("trig_kink").array


def test_backends_agree_on_short_horizons():
    x0 = lb.lebesgue_starts(1, 500)
    a = lb._sums_nb(x0, 0.6, COEF, 15)
    b = lb._sums_np(x0, 0.6, COEF, 15)
    assert np.max(np.abs(a - b)) < 1e-9


def test_backends_agree_statistically_on_long_horizons():
    x0 = lb.lebesgue_starts(2, 4000)
    a = lb._sums_nb(x0, 0.3, COEF, 2000) / 2000
    b = lb._sums_np(x0, 0.3, COEF, 2000) / 2000
    se = np.hypot(a.std(), b.std()) / np.sqrt(a.size)
    assert abs(a.mean() - b.mean()) < 4 * se


def test_sums_match_orbit():
    x0 = np.array([0.123, 0.77])
    s = lb.birkhoff_sums_kernel(x0, 0.4, COEF, 100)
    for i, x in enumerate(x0):
        xs = orbit_array(x, 0.4, 99)
        assert abs(s[i] - np.sum(evaluate_array(COEF, xs))) < 1e-10


def test_ld_sup_dominates_value_exactly():
    x0 = lb.lebesgue_starts(3, 300)
    for ld in (lb._ld_nb, lb._ld_np):
        at, sup = ld(x0, 0.25, COEF, 64, 640)
        assert np.all(sup >= at)


def test_return_times_backends_and_geometric_at_zero():
    y0 = lb.lebesgue_starts(4, 20000, 0, 0.5, 1.0)
    a = lb._returns_nb(y0, 0.0, 10**6)
    b = lb._returns_np(y0, 0.0, 10**6)
    assert np.array_equal(a, b)
    assert abs(np.mean(a > 4) - 1 / 16) < 0.01


def test_quenched_constant_equals_autonomous():
    x0 = lb.lebesgue_starts(5, 50)
    betas = np.full(300, 0.2)
    q = lb.quenched_sums_kernel(x0, betas, COEF, 100, 200)
    full = lb.birkhoff_sums_kernel(x0, 0.2, COEF, 300)
    head = lb.birkhoff_sums_kernel(x0, 0.2, COEF, 100)
    assert np.allclose(q, full - head, atol=1e-9)


def test_count_and_hit_kernels_against_loop():
    x0 = lb.lebesgue_starts(6, 20)
    z, r = 0.7, 0.05
    ends = np.array([10, 25, 60], dtype=np.int64)
    counts = lb.count_kernel(x0, 0.3, z, r, ends)
    hits = lb.hit_kernel(x0, 0.3, z, r, 500)
    for i, x in enumerate(x0):
        xs = np.array(list(lsv_orbit(x, 0.3, 600)))
        inside = np.abs(xs - z) < r
        ref = [inside[:10].sum(), inside[10:25].sum(), inside[25:60].sum()]
        assert list(counts[i]) == ref
        first = np.nonzero(inside[1:501])[0]
        assert hits[i] == (first[0] + 1 if first.size else 501)


def test_invariant_starts_reproducible_and_in_range():
    a = lb.invariant_starts(0.5, 9, 1000)
    b = np.concatenate([lb.invariant_starts(0.5, 9, 400), lb.invariant_starts(0.5, 9, 600, 400)])
    assert np.array_equal(a, b)
    assert a.min() >= 0.0 and a.max() <= 1.0


def test_invariant_starts_follow_density():
    from chaoslab.induced import induced_measure

    x = lb.invariant_starts(0.5, 10, 200_000)
    m = induced_measure(0.5)
    for level in (0.1, 0.3, 0.5, 0.8):
        xs = np.linspace(0, level, 20001)[1:]
        mass = np.trapezoid(m.density(xs), xs)
        assert abs(np.mean(x < level) - mass) < 0.01


def test_check_starts():
    with pytest.raises(DomainError):
        lb.check_starts([0.2, 1.5])


def test_quenched_driver_kernel_reproducible():
    d = QuenchedDriver.uniform(0.0, 0.4, 7)
    x0 = lb.lebesgue_starts(11, 10)
    b = d.betas(400)
    assert np.array_equal(lb.quenched_sums_kernel(x0, b, COEF, 100, 300),
                          lb.quenched_sums_kernel(x0, b, COEF, 100, 300))
