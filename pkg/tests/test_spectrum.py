import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from front_stability_lab import spectrum
from front_stability_lab.errors import PreconditionError
from front_stability_lab.weight import WeightSpec

from conftest import solve_combustion


@pytest.fixture(scope="module")
def comb05():
    return solve_combustion(0.5)


def test_combustion_unweighted_abscissa_is_marginal(comb05):
    _, fr = comb05
    zero = WeightSpec(0.0, 0.0)
    assert abs(spectrum.essential_abscissa(fr, zero)) <= 1e-12
    assert abs(spectrum.sampled_abscissa(fr, zero)) <= 1e-12


@given(st.floats(0.0, 0.6), st.floats(0.0, 0.6))
@settings(max_examples=30, deadline=None)
def test_closed_form_matches_theta_grid(comb05, am, ap):
    _, fr = comb05
    spec = WeightSpec(am, ap)
    closed = spectrum.essential_abscissa(fr, spec)
    # both rest Jacobians have top eigenvalue 0, so the edge is alpha^2 - c alpha
    c = fr.c
    assert closed == pytest.approx(max(am * am - c * am, ap * ap - c * ap), abs=1e-15)
    assert abs(closed - spectrum.sampled_abscissa(fr, spec)) <= 1e-12


def test_dispersion_with_general_diffusion_is_analytic():
    A = np.diag([-0.2, -1.0])
    D = [1.0, 0.3]
    c, alpha = 0.7, 0.25
    th = np.linspace(-5, 5, 41)
    curve = spectrum.dispersion_curves(A, c, alpha, th, diffusion=D)
    for j, (a, d) in enumerate(zip(np.diag(A), D)):
        expect = a + d * (alpha**2 - th**2 - 2j * th * alpha) + c * (1j * th - alpha)
        got = np.array([min(row, key=lambda x: abs(x - e)) for row, e in zip(curve.branches, expect)])
        assert np.allclose(got, expect, atol=1e-12)


def test_dispersion_csv_layout():
    curve = spectrum.dispersion_curves(np.zeros((1, 1)), 0.5, 0.0, np.array([0.0, 1.0]))
    lines = curve.to_csv().strip().splitlines()
    assert lines[0] == "theta,branch_index,re_lambda,im_lambda"
    assert len(lines) == 3


def test_default_theta_grid_contains_zero():
    g = spectrum.default_theta_grid(0.6)
    assert g.size % 2 == 1 and 0.0 in g


def test_find_weight_is_admissible(comb05):
    sys_, fr = comb05
    nu = spectrum.default_nu(fr.c)
    found = spectrum.find_weight(fr, nu)
    assert found.found and found.margin > 0
    adm = spectrum.weight_admissibility(sys_, fr, found.spec, nu, eig_tol=1e-5)
    assert adm.admissible
    assert adm.n_near == 1
    # weighted edge sits close to the optimum -c^2/4 on both sides
    assert found.abscissa < -nu
    assert found.spec.alpha_minus == pytest.approx(found.spec.alpha_plus, abs=5e-3)


def test_unweighted_combustion_fails_clause3(comb05):
    sys_, fr = comb05
    adm = spectrum.weight_admissibility(sys_, fr, WeightSpec(0.1, 0.0), 0.01)
    assert adm.clause1 and adm.clause2 and not adm.clause3
    assert not adm.admissible


def test_bistable_translational_eigenvalue(bistable_sys, bistable_front):
    lam, _, cos, vals = spectrum.translational_eigen(bistable_sys, bistable_front)
    assert abs(lam) < 1e-5
    assert cos > 0.999
    rest = vals[np.abs(vals) > 1e-5]
    # Q-restricted abscissa well below -min(a, c^2/4)/2
    assert rest.real.max() < -min(0.7, 0.02) / 2
    assert rest.real.max() < -0.29


def test_discrete_spectrum_is_grid_independent():
    out = []
    for n in (801, 1201):
        sys_, fr = solve_combustion(0.5, L=40.0, n_nodes=n)
        spec = WeightSpec(0.3125, 0.3129)
        vals, _ = spectrum.discrete_spectrum_1d(sys_, fr, spec)
        out.append(np.sort(vals.real)[::-1][:2])
    assert abs(out[0][0]) < 1e-6 and abs(out[1][0]) < 1e-6
    assert out[0][1] == pytest.approx(out[1][1], abs=2e-3)
    assert out[0][1] == pytest.approx(-0.0994, abs=2e-3)


def test_preconditions(comb05):
    sys_, fr = comb05
    with pytest.raises(PreconditionError):
        spectrum.find_weight(fr, 0.0)
    with pytest.raises(PreconditionError):
        spectrum.weight_admissibility(sys_, fr, WeightSpec(0.2, 0.2), -1.0)


def test_half_lines():
    hl = spectrum.multidim_essential_set([-0.1 + 0.5j, -0.3])
    assert hl.contains(-0.1 - 2.0 + 0.5j)
    assert not hl.contains(0.0 + 0.5j)
    assert hl.contains(-0.3)
    assert not hl.contains(-0.5 + 0.2j)
    assert hl.describe()[0] == {"re_max": -0.1, "im": 0.5}
