import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from front_stability_lab import model
from front_stability_lab.errors import DomainError

states = st.tuples(st.floats(0.05, 3.0), st.floats(0.0, 1.5))
small = st.tuples(st.floats(-0.04, 0.04), st.floats(-0.04, 0.04))


@pytest.mark.parametrize("kappa", [0.25, 0.5, 1.0, 2.0])
def test_combustion_rest_states_are_zeros(kappa):
    sys_ = model.combustion(model.CombustionParams(kappa=kappa))
    for rest in sys_.rest_states:
        assert np.allclose(model.eval_f(sys_, rest), 0.0)
    assert np.allclose(sys_.rest_states[0], [1 / kappa, 0.0])


@given(states, st.floats(0.1, 3.0))
def test_combustion_kinetics_conserve_enthalpy(u, kappa):
    sys_ = model.combustion(model.CombustionParams(kappa=kappa))
    f = sys_.f(np.array(u))
    assert abs(f[0] + f[1] / kappa) <= 1e-14 * max(1.0, abs(f[0]))


@given(states)
@settings(max_examples=50)
def test_combustion_jacobian_matches_differences(u):
    sys_ = model.combustion(model.CombustionParams(kappa=0.7))
    u = np.array(u)
    eps = 1e-6
    J = sys_.df(u)
    for j in range(2):
        du = np.zeros(2)
        du[j] = eps
        col = (sys_.f(u + du) - sys_.f(u - du)) / (2 * eps)
        assert np.allclose(J[:, j], col, rtol=1e-5, atol=1e-8)


@given(states)
@settings(max_examples=50)
def test_combustion_hessian_matches_differences(u):
    sys_ = model.combustion(model.CombustionParams(kappa=0.7))
    u = np.array(u)
    eps = 1e-6
    T = sys_.d2f(u)
    for k in range(2):
        du = np.zeros(2)
        du[k] = eps
        col = (sys_.df(u + du) - sys_.df(u - du)) / (2 * eps)
        assert np.allclose(T[..., k], col, rtol=1e-4, atol=1e-7)


def test_product_triangular_structure():
    sys_ = model.combustion()
    assert (sys_.n1, sys_.n2) == (1, 1)
    # at the burned state the temperature equation decouples: A1 = 0
    J = sys_.df(sys_.rest_states[0])
    assert J[0, 0] == 0.0 and J[1, 0] == 0.0
    assert np.allclose(sys_.A1, 0.0)


@given(states, small)
@settings(max_examples=40)
def test_N_is_the_taylor_remainder(u, v):
    sys_ = model.combustion(model.CombustionParams(kappa=0.5))
    u, v = np.array(u) + 0.1, np.array(v)
    N = model.eval_N(sys_, u, v)
    lhs = sys_.f(u + v) - sys_.f(u) - sys_.df(u) @ v
    assert np.allclose(N @ v, lhs, rtol=1e-7, atol=1e-13)


def test_bistable_exact_front_solves_the_ode():
    a = 0.7
    z = np.linspace(-10, 10, 2001)
    phi, c = model.bistable_exact(z, a)
    sys_ = model.bistable(model.BistableParams(a=a))
    h = z[1] - z[0]
    d1 = np.gradient(phi, h, edge_order=2)
    d2 = np.gradient(d1, h, edge_order=2)
    res = d2 + c * d1 + sys_.f(phi[:, None])[:, 0]
    assert np.max(np.abs(res[5:-5])) < 1e-5
    assert np.isclose(c, np.sqrt(2) * 0.2)


@pytest.mark.parametrize("bad", [{"kappa": 0.0}, {"kappa": -1.0}, {"epsilon": 1.0}])
def test_combustion_parameter_domain(bad):
    with pytest.raises(DomainError):
        model.CombustionParams(**bad)


@pytest.mark.parametrize("a", [0.5, 1.0, 0.2])
def test_bistable_threshold_domain(a):
    with pytest.raises(DomainError):
        model.BistableParams(a=a)


def test_non_finite_state_rejected():
    sys_ = model.bistable()
    with pytest.raises(DomainError):
        model.eval_f(sys_, np.array([np.nan]))
    with pytest.raises(DomainError):
        model.eval_N(sys_, np.array([0.1]), np.array([0.1]), quad_order=1)


def test_exploration_mode_uses_small_fuel_diffusion():
    sys_ = model.build_system("combustion", {"kappa": 0.5, "epsilon": 0.1}, mode="exploration")
    assert np.allclose(sys_.diffusion, [1.0, 0.1])
    assert not sys_.identity_diffusion
    with pytest.raises(DomainError):
        model.build_system("brusselator", {})
