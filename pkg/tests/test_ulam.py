import numpy as np
import pytest

from chaoslab.errors import ConfigurationError, ConvergenceError, DomainError
from chaoslab.induced import induced_measure, ladder
from chaoslab.maps import step
from chaoslab.ulam import (
    density_at_half,
    solved_model,
    transfer_norm_decay,
    ulam_matrix,
)


def test_doubling_density_uniform():
    m = solved_model(0.0, 64)
    assert np.max(np.abs(m.density - 1.0)) < 1e-8


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.75, 0.95])
def test_rows_stochastic(beta):
    mat = ulam_matrix(beta, 64).matrix
    assert np.max(np.abs(np.asarray(mat.sum(axis=1)).ravel() - 1.0)) < 1e-12
    assert mat.min() >= 0.0


def test_density_normalised():
    m = solved_model(0.25, 4096)
    assert abs(np.sum(m.density) / m.bins - 1.0) < 1e-10


def test_blow_up_near_zero():
    m = solved_model(0.75, 4096)
    e = m.edges
    inside = (e[:-1] >= 2.0**-10) & (e[1:] <= 2.0**-4)
    w = m.density[inside] * m.midpoints[inside] ** 0.75
    assert w.max() / w.min() < 1.5


def test_blow_up_matches_induced_density():
    # the return-map construction resolves h near 0 without bin averaging
    x = np.geomspace(2.0**-10, 2.0**-4, 200)
    w = induced_measure(0.75).density(x) * x**0.75
    assert w.max() / w.min() < 1.5


def test_density_at_half_values():
    assert abs(density_at_half(0.0) - 1.0) < 0.01
    v = density_at_half(0.6)
    assert np.isfinite(v) and v > 0


def test_half_value_refinement_return_route():
    d = density_at_half(0.75, detail=True)
    assert d.drift < 0.005
    b = density_at_half(0.75, bins=1024)
    assert abs(d.value - b) / b < 0.005


@pytest.mark.xfail(strict=True, reason="plain Ulam converges like bins**-(1-beta) at 1/2; "
                   "see the return-map route for the refinement tolerance")
def test_half_value_refinement_plain_ulam_literal():
    lo = np.mean(solved_model(0.75, 2048).density[1023:1025])
    hi = np.mean(solved_model(0.75, 4096).density[2047:2049])
    assert abs(lo - hi) / hi < 0.005


@pytest.mark.xfail(strict=True, reason="plain Ulam drifts 1.2% from 4096 to 8192 bins at beta 0.75")
def test_density_at_half_plain_ulam_literal():
    density_at_half(0.75, bins=4096, method="uniform")


@pytest.mark.parametrize("beta", [0.25, 0.5])
def test_plain_and_induced_half_values_agree(beta):
    plain = density_at_half(beta, bins=4096, method="uniform")
    induced = density_at_half(beta)
    assert abs(plain - induced) / induced < 0.01


def test_plain_ulam_approaches_induced_value_at_three_quarters():
    # the plain estimate decreases monotonically towards the induced value
    target = density_at_half(0.75)
    vals = [np.mean(solved_model(0.75, b).density[b // 2 - 1:b // 2 + 1])
            for b in (1024, 4096, 16384)]
    assert vals[0] > vals[1] > vals[2] > target
    assert (vals[2] - target) < (vals[0] - target) / 1.5


def test_induced_measure_normalised_and_means():
    m = induced_measure(0.4)
    one = np.zeros(9)
    one[0] = 1.0
    assert abs(m.expect(one) - 1.0) < 1e-9
    # mean of x from a long orbit as an independent check
    from chaoslab.maps import orbit_array

    xs = orbit_array(0.123, 0.4, 2 * 10**6)
    x = np.zeros(9)
    x[1] = 1.0
    assert abs(m.expect(x) - xs.mean()) < 0.01


def test_ladder_is_preimage_chain():
    xs = ladder(0.5, 50)
    assert xs[0] == 0.5
    for a, b in zip(xs[:-1], xs[1:]):
        assert abs(step(b, 0.5) - a) < 1e-14


def test_norm_decay_doubling_sign_step():
    # exact dyadic computation: P sign(x - 1/2) = (f(x/2) + f((x+1)/2)) / 2 = 0
    norms = transfer_norm_decay(0.0, lambda x: np.sign(x - 0.5), p=1, n_max=12, bins=4096)
    assert np.all(norms < 1e-10)


def test_norm_decay_doubling_linear_halves():
    # P (x - 1/2) = (x - 1/2) / 2 exactly; Ulam on dyadic bins is exact here
    norms = transfer_norm_decay(0.0, lambda x: x - 0.5, p=1, n_max=10, bins=4096)
    assert abs(norms[0] - 0.125) < 1e-12
    assert np.allclose(norms[1:] / norms[:-1], 0.5, rtol=1e-9)


def test_norm_decay_doubling_dyadic_step_vanishes():
    # a step on quarters reaches the constant after two applications
    f = lambda x: np.where(x < 0.25, 1.0, 0.0)
    norms = transfer_norm_decay(0.0, f, p=1, n_max=10, bins=4096)
    assert abs(norms[0] - 0.25) < 1e-12
    assert np.all(norms[1:] < 1e-10)


def test_norm_decay_zero():
    assert np.all(transfer_norm_decay(0.3, lambda x: 0.0 * x, n_max=10, bins=256) == 0.0)


def test_norm_decay_rate_beta_half():
    norms = transfer_norm_decay(0.5, lambda x: np.cos(2 * np.pi * x), p=1, n_max=100)
    n = np.arange(1, 101)
    sel = n >= 10
    slope = np.polyfit(np.log(n[sel]), np.log(norms[sel]), 1)[0]
    assert slope <= -0.7


def test_errors():
    with pytest.raises(DomainError):
        ulam_matrix(1.0, 64)
    with pytest.raises(ConfigurationError):
        ulam_matrix(0.3, 8)
    with pytest.raises(ConfigurationError):
        transfer_norm_decay(0.3, np.cos, p=0.5)
    assert issubclass(ConvergenceError, Exception)
