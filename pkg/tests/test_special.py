import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.errors import DomainError
from chaoslab.special import erf, gamma, normal_cdf


@given(st.floats(-8.0, 8.0))
def test_erf_against_math(x):
    assert abs(erf(x) - math.erf(x)) < 1e-14


def test_erf_vectorised_and_odd():
    x = np.linspace(-6, 6, 2001)
    assert np.max(np.abs(erf(x) + erf(-x))) == 0.0
    assert np.max(np.abs(erf(x) - np.vectorize(math.erf)(x))) < 1e-14


@given(st.floats(-20.0, 30.0).filter(lambda v: abs(v - round(v)) > 1e-3 or v > 0.5))
def test_gamma_against_math(x):
    ref = math.gamma(x)
    assert abs(gamma(x) - ref) <= 1e-12 * abs(ref)


def test_gamma_reflection_value():
    assert abs(gamma(-1.0 / 3.0) + 3.0 * gamma(2.0 / 3.0)) < 1e-12
    assert abs(gamma(0.5) - math.sqrt(math.pi)) < 1e-14


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(1.959963984540054) - 0.975) < 1e-12
