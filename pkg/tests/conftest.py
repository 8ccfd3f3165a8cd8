import os

import numpy as np
import pytest

from front_stability_lab import front as F
from front_stability_lab import model, projection, spectrum

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def bistable_sys():
    return model.bistable(model.BistableParams(a=0.7))


@pytest.fixture(scope="session")
def bistable_front(bistable_sys):
    g = F.tanh_guess(bistable_sys, 30.0, 1201, c0=0.5, width=2.0)
    return F.solve_front(bistable_sys, g)


def solve_combustion(kappa, L=40.0, n_nodes=801):
    sys_ = model.combustion(model.CombustionParams(kappa=kappa))
    g = F.tanh_guess(sys_, L, n_nodes, c0=0.5, width=2.0)
    return sys_, F.solve_front(sys_, g)


@pytest.fixture(scope="session")
def combustion_case():
    """kappa = 0.35 front with its admissible weight and adjoint."""
    sys_, fr = solve_combustion(0.35)
    nu = spectrum.default_nu(fr.c)
    spec = spectrum.find_weight(fr, nu).spec
    e = projection.compute_adjoint(sys_, fr, spec)
    return sys_, fr, spec, e, nu


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
