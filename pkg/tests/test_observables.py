import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.errors import ConfigurationError
from chaoslab.observables import (
    BASIS,
    BILLIARD_PRESETS,
    INTERVAL_PRESETS,
    Observable,
    billiard_preset,
    billiard_value,
    evaluate,
    evaluate_array,
    interval_preset,
)

COEF = st.lists(st.floats(-5, 5), min_size=len(BASIS), max_size=len(BASIS))


@given(COEF, st.floats(0.0, 1.0))
def test_scalar_and_vector_evaluation_agree(coef, x):
    c = np.array(coef)
    assert abs(evaluate(c, x) - evaluate_array(c, x)) < 1e-12


def test_basis_values():
    o = Observable.from_terms(one=1.0, x=2.0, kink=1.0, sign=3.0)
    assert o(0.0) == 1.0 + 0.3 - 3.0
    assert o(0.5) == 1.0 + 1.0 + 0.2
    assert o.value_at_zero == pytest.approx(-1.7)


def test_presets_build():
    for name in INTERVAL_PRESETS:
        interval_preset(name)
    for name in BILLIARD_PRESETS:
        billiard_preset(name)
    with pytest.raises(ConfigurationError):
        interval_preset("nope")
    with pytest.raises(ConfigurationError):
        Observable.from_terms(cubic=1.0)


def test_shift_and_scale():
    o = interval_preset("cos")
    s = o.shifted(0.25)
    assert s.mean_removed and s.coef[0] == -0.25
    assert np.allclose(o.scaled(3.0).array, 3.0 * o.array)
    assert interval_preset("zero").is_zero()


def test_billiard_observable_values():
    psi = billiard_preset("cos_q")
    assert psi(0.0, 0.3, 5.0) == 1.0
    assert billiard_value(psi.code, 2.5, 5.0) == pytest.approx(-1.0)
    s = billiard_preset("sin_q")
    assert billiard_value(s.code, 1.25, 5.0) == pytest.approx(1.0)
