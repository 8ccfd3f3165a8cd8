"""Acceptance criteria 1-10, one test each; results also go to the terminal summary."""

import os
import time

import numpy as np
import pytest

from front_stability_lab import analysis as A
from front_stability_lab import front as F
from front_stability_lab import model, spectrum
from front_stability_lab import projection as P
from front_stability_lab.cli import Pipeline
from front_stability_lab.config import load_config
from front_stability_lab.weight import WeightSpec

from conftest import ACCEPTANCE, CONFIGS


def record(num, ok, detail):
    ACCEPTANCE[num] = (bool(ok), detail)
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def combustion_run(tmp_path_factory):
    """front, weight and simulate stages of configs/combustion.json, timed."""
    cfg = load_config(os.path.join(CONFIGS, "combustion.json"))
    pipe = Pipeline(cfg, str(tmp_path_factory.mktemp("combustion")))
    t0 = time.time()
    pipe.run_front()
    spec = pipe.run_weight()
    series = pipe.run_simulate()
    elapsed = time.time() - t0
    rep = A.decay_report(series, cfg.sim.d, cfg.analysis.to_analysis_config())
    return cfg, spec, series, rep, elapsed


def test_criterion_01_bistable_front_oracle():
    t0 = time.time()
    sys_ = model.bistable(model.BistableParams(a=0.7))
    fr = F.solve_front(sys_, F.tanh_guess(sys_, 30.0, 1201, c0=0.5, width=2.0))
    elapsed = time.time() - t0
    exact, c_exact = model.bistable_exact(fr.z, 0.7)
    c_err = abs(fr.c - np.sqrt(2) * (0.7 - 0.5))
    p_err = float(np.max(np.abs(fr.values[:, 0] - exact)))
    ok = c_err < 1e-6 and p_err < 1e-6 and elapsed < 10 and c_exact == pytest.approx(np.sqrt(2) * 0.2)
    record(1, ok, f"|dc|={c_err:.2e} profile={p_err:.2e} runtime={elapsed:.2f}s")


def test_criterion_02_marginality_contrast(combustion_case):
    _, fr, spec, _, nu = combustion_case
    zero = WeightSpec(0.0, 0.0)
    a0 = spectrum.essential_abscissa(fr, zero)
    a0_grid = spectrum.sampled_abscissa(fr, zero)
    closed = spectrum.essential_abscissa(fr, spec)
    grid = spectrum.sampled_abscissa(fr, spec)
    formula = max(a * a - fr.c * a for a in (spec.alpha_minus, spec.alpha_plus))
    ok = (abs(a0) <= 1e-12 and abs(a0 - a0_grid) <= 1e-12 and abs(closed - formula) <= 1e-12
          and closed < -nu and abs(closed - grid) <= 1e-12)
    record(2, ok, f"abscissa(0)={a0:.1e} abscissa(alpha)={closed:.6f} alpha^2-c*alpha={formula:.6f} "
                  f"-nu={-nu:.4f} |closed-grid|={abs(closed - grid):.1e}")


def test_criterion_03_translational_eigenvalue(combustion_case):
    sys_, fr, spec, _, nu = combustion_case
    vals, _ = spectrum.discrete_spectrum_1d(sys_, fr, spec)
    near = vals[(vals.real >= -nu / 2) & (np.abs(vals) < 1e-5)]
    in_half = vals[vals.real >= -nu / 2]
    _, _, cos, _ = spectrum.translational_eigen(sys_, fr, spec)
    ok = near.size == 1 and in_half.size == 1 and cos > 0.999
    record(3, ok, f"eigenvalues in Re>=-nu/2: {in_half.size}, |lambda0|={abs(near[0]) if near.size else np.nan:.1e} "
                  f"cosine={cos:.12f}")


def test_criterion_04_projector_suite(combustion_case, combustion_run, rng):
    _, fr, _, e, _ = combustion_case
    t0 = time.time()
    pr = P.Projector(fr, e)
    ny = 16
    U = rng.normal(size=(fr.n_nodes, ny, fr.n)) * np.exp(-(fr.z / 8) ** 2)[:, None, None]
    U[0] = U[-1] = 0.0
    PU, QU = pr.project(U)
    PPU, _ = pr.project(PU)
    PQU, _ = pr.project(QU)
    h = rng.normal(size=ny)
    trans = pr.pi(pr.dphi[:, None, :] * h[None, :, None])
    scale = np.max(np.abs(U))
    errs = {"P^2-P": np.max(np.abs(PPU - PU)) / scale, "PQ": np.max(np.abs(PQU)) / scale,
            "pi(phi'h)-h": np.max(np.abs(trans - h))}
    elapsed = time.time() - t0
    pi_v = combustion_run[2].meta["max_pi_v"]
    ok = all(v < 1e-7 for v in errs.values()) and pi_v < 1e-7 and elapsed < 10
    detail = " ".join(f"{k}={v:.1e}" for k, v in errs.items())
    record(4, ok, f"{detail} max pi(v(t))={pi_v:.1e} runtime={elapsed:.2f}s")


def test_criterion_05_decomposition_roundtrip(combustion_case, rng):
    _, fr, _, e, _ = combustion_case
    pr = P.Projector(fr, e)
    ny, Ly = 16, 16.0
    y = np.arange(ny) * Ly / ny - Ly / 2
    worst = 0.0
    for _ in range(50):
        U = np.zeros((fr.n_nodes, ny, fr.n))
        for j in range(fr.n):
            z0, s = rng.uniform(-5, 5), rng.uniform(1, 3)
            mode = np.cos(2 * np.pi * rng.integers(0, 3) * y / Ly + rng.uniform(0, 6))
            U[:, :, j] = 1e-3 * np.exp(-((fr.z - z0) / s) ** 2)[:, None] * mode[None, :]
        U[0] = U[-1] = 0.0
        v = pr.project(U)[1]
        q = 0.05 * rng.normal() * np.cos(2 * np.pi * y / Ly) + 0.02 * rng.normal()
        u = pr.recompose(P.PerturbationState(v, q, None))
        back = pr.decompose(u, (Ly / ny,))
        worst = max(worst, np.max(np.abs(pr.recompose(back) - u)), np.max(np.abs(back.q - q)))
    q = 0.1 + 0.05 * np.sin(2 * np.pi * y / Ly)
    s = pr.decompose(pr.shift_difference(q), (Ly / ny,))
    shift_err = float(np.max(np.abs(s.q - q)))
    ok = worst < 1e-8 and shift_err < 1e-8
    record(5, ok, f"roundtrip={worst:.1e} translation q error={shift_err:.1e}")


def test_criterion_06_heat_rates():
    t0 = time.time()
    r = A.heat_decay_rates(2)
    elapsed = time.time() - t0
    ok = abs(r["exponent"] + 0.25) <= 0.03 and abs(r["gradient_exponent"] + 0.75) <= 0.05 and elapsed < 60
    record(6, ok, f"exponent={r['exponent']:.4f} gradient={r['gradient_exponent']:.4f} runtime={elapsed:.2f}s")


def test_criterion_07_integral_inequalities():
    t0 = time.time()
    r = A.verify_integral_inequalities()
    elapsed = time.time() - t0
    counts = {k: r[k]["n_bounded"] for k in ("clause1", "clause2", "clause3")}
    controls = all(n["diverges"] for k in counts for n in r[k]["negative_controls"])
    ok = r["passed"] and all(n >= 10 for n in counts.values()) and controls and elapsed < 60
    record(7, ok, f"bounded triples={counts} controls diverge={controls} runtime={elapsed:.1f}s")


def test_criterion_08_quadratic_scaling(combustion_case):
    sys_, fr, spec, e, _ = combustion_case
    cfg = A.AnalysisConfig(n_directions=100)
    r = A.verify_nonlinear_bounds(sys_, fr, spec, e, cfg)
    degs = r["degrees"]
    in_band = all(abs(d["min"] - 2) <= 0.25 and abs(d["max"] - 2) <= 0.25 for d in degs.values())
    ok = r["passed"] and in_band and r["identity_residual"] < 1e-8 and len(cfg.scales) == 3
    spread = " ".join(f"{k}=[{d['min']:.3f},{d['max']:.3f}]" for k, d in degs.items())
    record(8, ok, f"{spread} identity={r['identity_residual']:.1e}")


def test_criterion_09_end_to_end_decay(combustion_run):
    cfg, _, series, rep, elapsed = combustion_run
    grid_ok = cfg.sim.n_z - 1 == 512 and tuple(cfg.sim.n_y) == (256,) and cfg.sim.d == 2
    horizon_ok = cfg.sim.T_end == 50.0 and series.records[-1]["t"] == pytest.approx(50.0)
    checks = rep["checks"]
    want = {"v_hka": 1.5, "q_hk": 0.25, "w_hk": 0.75, "v2_hk": 1.5}
    rates_ok = all(checks[c]["rate"] == r and checks[c]["passed"] for c, r in want.items())
    v1_ok = "v1_hk" in checks and checks["v1_hk"]["passed"]
    ok = grid_ok and horizon_ok and rep["ball_ok"] and rates_ok and v1_ok and elapsed < 900
    ratios = " ".join(f"{c}={checks[c]['max_ratio']:.3f}" for c in (*want, "v1_hk") if c in checks)
    record(9, ok, f"T_exit={rep['T_exit']} max ratios: {ratios} runtime={elapsed:.0f}s")


def test_criterion_10_weight_contrast(combustion_run):
    rep = combustion_run[3]
    fits = rep["fits"]
    gap = fits["v_hk"]["exponent"] - fits["v_hka"]["exponent"]
    ok = gap >= 0.5
    record(10, ok, f"unweighted={fits['v_hk']['exponent']:.3f} weighted={fits['v_hka']['exponent']:.3f} "
                   f"gap={gap:.3f}")
