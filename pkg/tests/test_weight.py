import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from front_stability_lab.errors import RangeError
from front_stability_lab.weight import WeightFunction, WeightSpec, weight_eval

rates = st.floats(0.0, 2.0)


@given(rates, rates)
def test_sigma_is_c2_across_the_bridge(am, ap):
    wf = WeightFunction(WeightSpec(am, ap))
    eps = 1e-9
    for z0 in (-1.0, 1.0):
        for order in (0, 1, 2):
            left = wf.sigma(np.array([z0 - eps]), order)[0]
            right = wf.sigma(np.array([z0 + eps]), order)[0]
            assert abs(left - right) < 1e-6


@given(rates, rates)
def test_sigma_is_linear_outside(am, ap):
    wf = WeightFunction(WeightSpec(am, ap))
    z = np.array([-7.0, -2.0, 2.0, 9.0])
    assert np.allclose(wf.sigma(z), [am * -7, am * -2, ap * 2, ap * 9])
    assert np.allclose(wf.sigma(z, 1), [am, am, ap, ap])
    assert np.allclose(wf.sigma(z, 2), 0.0)


def test_derivatives_match_differences():
    wf = WeightFunction(WeightSpec(0.3, 0.8))
    z = np.linspace(-0.9, 0.9, 7)
    h = 1e-5
    d1 = (wf.sigma(z + h) - wf.sigma(z - h)) / (2 * h)
    d2 = (wf.sigma(z + h, 1) - wf.sigma(z - h, 1)) / (2 * h)
    assert np.allclose(wf.sigma(z, 1), d1, atol=1e-8)
    assert np.allclose(wf.sigma(z, 2), d2, atol=1e-7)


def test_zero_weight_is_one():
    wf = WeightFunction(WeightSpec())
    assert np.allclose(wf(np.linspace(-50, 50, 11)), 1.0)


def test_offset_rescales_gamma():
    spec = WeightSpec(0.2, 0.4)
    z = np.linspace(-3, 3, 13)
    assert np.allclose(WeightFunction(spec, offset=1.5)(z), np.exp(1.5) * WeightFunction(spec)(z))


def test_overflow_guard_and_log_mode():
    wf = WeightFunction(WeightSpec(1.0, 1.0))
    with pytest.raises(RangeError):
        weight_eval(wf, np.array([800.0]))
    assert weight_eval(wf, np.array([800.0]), log=True)[0] == pytest.approx(800.0)


def test_spec_serialization():
    d = WeightSpec(0.25, 0.5).as_dict()
    assert d["alpha_minus"] == 0.25 and d["alpha_plus"] == 0.5
    assert d["bridge"]["kind"] == "quintic-hermite"
