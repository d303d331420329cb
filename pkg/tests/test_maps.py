import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.errors import DomainError
from chaoslab.maps import (
    QuenchedDriver,
    derivative,
    left_branch_inverse,
    lsv_orbit,
    lsv_step,
    orbit_array,
    quenched_orbit,
    quenched_orbit_array,
    step,
    step_array,
)

X = st.floats(0.0, 1.0)
B = st.floats(0.0, 0.999)


def test_branch_values():
    assert lsv_step(0.5, 0.7) == 1.0
    assert lsv_step(0.75, 0.3) == 0.5
    assert lsv_step(0.0, 0.4) == 0.0
    assert lsv_step(1.0, 0.4) == 1.0


def test_beta_one_formula_on_kernel():
    # beta = 1 lies outside the parameter range; the raw branch formula still
    # evaluates 1/4 + 2 (1/4)^2
    assert step(0.25, 1.0) == 0.375
    with pytest.raises(DomainError):
        lsv_step(0.25, 1.0)


@pytest.mark.parametrize("x,beta", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.0)])
def test_domain_errors(x, beta):
    with pytest.raises(DomainError):
        lsv_step(x, beta)


@given(X, B)
def test_step_stays_in_unit_interval(x, beta):
    y = lsv_step(x, beta)
    assert 0.0 <= y <= 1.0


@given(st.floats(1e-6, 1.0), B)
def test_left_inverse_roundtrip(y, beta):
    x = left_branch_inverse(y, beta)
    assert 0.0 < x <= 0.5
    assert abs(step(x, beta) - y) <= 1e-12


@given(st.floats(1e-3, 0.5), B)
def test_derivative_matches_difference_quotient(x, beta):
    h = 1e-7
    lo, hi = max(x - h, 0.0), min(x + h, 0.5)
    if hi - lo < h:
        return
    fd = (step(hi, beta) - step(lo, beta)) / (hi - lo)
    assert abs(fd - derivative(x, beta)) < 1e-4 * (1.0 + derivative(x, beta))


def test_orbit_examples():
    assert list(lsv_orbit(0.0, 0.5, 5)) == [0.0] * 6
    assert list(lsv_orbit(0.75, 0.5, 2)) == [0.75, 0.5, 1.0]


def test_orbit_array_matches_generator():
    a = orbit_array(0.123, 0.4, 200)
    b = np.array(list(lsv_orbit(0.123, 0.4, 200)))
    assert np.array_equal(a, b)


def test_step_array_matches_scalar_closely():
    x = np.linspace(0, 1, 1001)
    ref = np.array([step(v, 0.37) for v in x])
    assert np.max(np.abs(step_array(x, 0.37) - ref)) < 1e-15


def test_orbit_histogram_against_ulam_density():
    from chaoslab.ulam import solved_model

    xs = orbit_array(0.1, 0.25, 10**6)
    # 16 cells, Ulam density from 4096 bins averaged onto the same cells
    model = solved_model(0.25, 4096)
    ref = model.density.reshape(16, -1).mean(axis=1)
    hist, _ = np.histogram(xs, bins=16, range=(0, 1), density=True)
    sel = np.arange(16) / 16 >= 0.2 - 1e-12
    assert np.max(np.abs(hist[sel] - ref[sel]) / ref[sel]) < 0.02


def test_constant_driver_matches_autonomous_orbit():
    d = QuenchedDriver.constant(0.2, seed=5)
    a = np.array(list(quenched_orbit(0.3, d, 500)))
    b = np.array(list(lsv_orbit(0.3, 0.2, 500)))
    assert np.array_equal(a, b)
    assert np.array_equal(quenched_orbit_array(0.3, d, 500), orbit_array(0.3, 0.2, 500))


def test_zero_fixed_under_any_driver():
    d = QuenchedDriver.uniform(0.0, 0.4, 11)
    assert list(quenched_orbit(0.0, d, 50)) == [0.0] * 51


def test_driver_reproducible_and_in_range():
    a = QuenchedDriver.uniform(0.0, 0.4, 3)
    b = QuenchedDriver.uniform(0.0, 0.4, 3)
    assert np.array_equal(a.betas(100), b.betas(100))
    assert np.array_equal(list(quenched_orbit(0.4, a, 100)), list(quenched_orbit(0.4, b, 100)))
    bs = a.betas(10_000)
    assert bs.min() >= 0.0 and bs.max() < 0.4
    assert a.beta(17) == a.betas(1, 17)[0]


@pytest.mark.parametrize("lo,hi", [(0.0, 0.45), (-0.1, 0.2), (0.3, 0.2)])
def test_driver_rejects_bad_laws(lo, hi):
    with pytest.raises(DomainError):
        QuenchedDriver.uniform(lo, hi, 1)
