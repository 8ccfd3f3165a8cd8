"""Command-line pipeline: front -> spectrum -> weight -> simulate -> verify.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage/config error,
3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys as _sys
import time
from importlib import resources

import numpy as np
from pydantic import ValidationError

from . import analysis, front as front_mod, model, norms, projection, spectrum
from .config import RunConfig, load_config
from .errors import LabError, NumericalError, PreconditionError
from .evolve import simulate_perturbed_front
from .weight import WeightSpec

log = logging.getLogger("front_stability_lab")

STAGES = ("front", "spectrum", "weight", "simulate", "verify")
EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _load_anchors():
    text = resources.files(__package__).joinpath("anchors.json").read_text(encoding="utf-8")
    return {k: (v["paper_ref"], v["anchor"]) for k, v in json.loads(text).items()}


# claim_id -> (reference, anchor text), kept as package data
ANCHORS = _load_anchors()


class MissingArtifact(LabError):
    pass


def claim(claim_id, passed, fitted=None, tolerance=None):
    ref, anchor = ANCHORS[claim_id]
    return {"claim_id": claim_id, "paper_ref": ref, "anchor": anchor,
            "status": "pass" if passed else "fail",
            "fitted_values": _jsonable(fitted or {}), "tolerance": _jsonable(tolerance)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _dump(path, doc):
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_report(results, out_dir):
    """report.json (sorted keys) and summary.txt; merges with claims already on disk."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "report.json")
    claims = {}
    if os.path.exists(path):
        with open(path) as fh:
            claims = {c["claim_id"]: c for c in json.load(fh).get("claims", [])}
    for c in results.get("claims", []):
        claims[c["claim_id"]] = c
    ordered = [claims[k] for k in sorted(claims)]
    failing = [c["claim_id"] for c in ordered if c["status"] != "pass"]
    doc = {"schema": "report/1", "claims": ordered, "failing": failing,
           "status": "pass" if not failing else "fail"}
    _dump(path, doc)
    width = max([len("claim_id")] + [len(c["claim_id"]) for c in ordered])
    lines = [f"{'claim_id':<{width}}  status  anchor"]
    for c in ordered:
        lines.append(f"{c['claim_id']:<{width}}  {c['status']:<6}  {c['anchor']}")
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return doc


# -- stages ---------------------------------------------------------------------

class Pipeline:
    def __init__(self, cfg: RunConfig, out_dir: str):
        self.cfg = cfg
        self.out = out_dir
        os.makedirs(out_dir, exist_ok=True)
        m = cfg.model
        self.sys = model.build_system(m.name, dict(m.params), mode=m.mode)
        self.claims = []

    def _path(self, name):
        return os.path.join(self.out, name)

    def _require(self, name, stage):
        p = self._path(name)
        if not os.path.exists(p):
            raise MissingArtifact(f"{p} not found; run --stage {stage} first")
        return p

    def _load_front(self, name="front.json"):
        with open(self._require(name, "front")) as fh:
            return front_mod.FrontProfile.from_json(fh.read())

    def _load_weight(self):
        with open(self._require("weight.json", "weight")) as fh:
            doc = json.load(fh)
        a = doc["alpha"]
        return WeightSpec(a["alpha_minus"], a["alpha_plus"])

    def _nu(self, fr):
        nu = self.cfg.weight.nu
        return spectrum.default_nu(fr.c) if nu is None else nu

    def run_front(self):
        fc = self.cfg.front
        L = fc.L
        if L is None:
            rest = self.sys.rest_states
            g = front_mod.tanh_guess(self.sys, 20.0, 401, c0=fc.c0, width=fc.width)
            coarse = front_mod.solve_front(self.sys, g, tol=max(fc.tol, 1e-8), max_iter=fc.max_iter)
            L = front_mod.default_half_length(self.sys, coarse.c, rest[0], rest[1])
            guess = coarse
        else:
            guess = front_mod.tanh_guess(self.sys, L, fc.n_nodes, c0=fc.c0, width=fc.width)
        fr = front_mod.solve_front(self.sys, guess, L=L, n_nodes=fc.n_nodes, tol=fc.tol, max_iter=fc.max_iter)
        with open(self._path("front.json"), "w") as fh:
            fh.write(fr.to_json())
        info = {"c": fr.c, "iterations": fr.iterations, "residual": fr.residual,
                "omega_minus": fr.omega_minus, "omega_plus": fr.omega_plus, "L": fr.L, "h": fr.h}
        self.claims.append(claim("front_converged", fr.residual <= fc.tol, info, fc.tol))
        if self.sys.name == "bistable":
            exact, c_exact = model.bistable_exact(fr.z, self.sys.params["a"])
            c_err = abs(fr.c - c_exact)
            p_err = float(np.max(np.abs(fr.values[:, 0] - exact)))
            self.claims.append(claim("front_closed_form", c_err < 1e-6 and p_err < 1e-6,
                                     {"c": fr.c, "c_exact": c_exact, "c_error": c_err, "profile_error": p_err},
                                     1e-6))
        log.info("front: c=%.10f after %d Newton steps", fr.c, fr.iterations)
        return fr

    def _dispersion(self, fr, alpha: WeightSpec, tag):
        out = {}
        for side, A, a in (("minus", fr.jac_minus, alpha.alpha_minus), ("plus", fr.jac_plus, alpha.alpha_plus)):
            curve = spectrum.dispersion_curves(A, fr.c, a, side=side)
            curve.to_csv(self._path(f"dispersion_{side}_{tag}.csv"))
            out[side] = curve.max_real()
        closed = spectrum.essential_abscissa(fr, alpha)
        sampled = max(out.values())
        return closed, sampled

    def run_spectrum(self):
        fr = self._load_front()
        zero = WeightSpec(0.0, 0.0)
        closed, sampled = self._dispersion(fr, zero, "alpha0")
        lam0, _, cos, vals = spectrum.translational_eigen(self.sys, fr, zero)
        doc = {"essential_abscissa": closed, "sampled_abscissa": sampled,
               "lambda0": complex(lam0), "cosine": cos,
               "rightmost": [complex(v) for v in vals[:10]]}
        _dump(self._path("spectrum.json"), doc)
        self.claims.append(claim("essential_spectrum_closed_form", abs(closed - sampled) <= 1e-12,
                                 {"essential_abscissa": closed, "sampled_abscissa": sampled}, 1e-12))
        log.info("spectrum: essential abscissa at alpha=0 is %.3e", closed)
        return doc

    def run_weight(self):
        fr = self._load_front()
        nu = self._nu(fr)
        wc = self.cfg.weight
        if wc.alpha is not None:
            spec = WeightSpec(*wc.alpha)
        else:
            found = spectrum.find_weight(fr, nu, n_grid=wc.n_grid)
            if not found.found:
                raise PreconditionError(f"no admissible weight for nu={nu:.4g} (best abscissa {found.abscissa:.4g})")
            spec = found.spec
        adm = spectrum.weight_admissibility(self.sys, fr, spec, nu, eig_tol=wc.eig_tol)
        closed, sampled = self._dispersion(fr, spec, "weighted")
        lam0, _, cos, _ = spectrum.translational_eigen(self.sys, fr, spec)
        doc = {"alpha": spec.as_dict(), "nu": nu, "admissibility": adm.as_dict(),
               "essential_abscissa": closed, "sampled_abscissa": sampled, "cosine": cos}
        _dump(self._path("weight.json"), doc)
        self.claims.append(claim("weighted_abscissa", closed < -nu and abs(closed - sampled) <= 1e-12,
                                 {"essential_abscissa": closed, "sampled_abscissa": sampled, "nu": nu}, 1e-12))
        self.claims.append(claim("weight_admissible", adm.admissible and cos > 0.999,
                                 {**adm.as_dict(), "cosine": cos}, {"eig_tol": wc.eig_tol, "cosine": 0.999}))
        log.info("weight: alpha=(%.4f, %.4f), abscissa %.4f", spec.alpha_minus, spec.alpha_plus, closed)
        return spec

    def _sim_front(self, fr):
        s = self.cfg.sim
        if fr.n_nodes == s.n_z and abs(fr.L - s.L_z) < 1e-12:
            return fr
        return front_mod.solve_front(self.sys, fr, L=s.L_z, n_nodes=s.n_z, tol=self.cfg.front.tol,
                                     max_iter=self.cfg.front.max_iter)

    def initial_field(self, fr, proj, sim_cfg, rng):
        ic = self.cfg.init
        mesh = sim_cfg.y_mesh()
        r2 = sum(m**2 for m in mesh)
        q0 = ic.q_amplitude * np.exp(-r2 / (2.0 * ic.q_variance))
        ut = proj.shift_difference(q0)
        if ic.bump_amplitude:
            b = ic.bump_amplitude * np.exp(-((fr.z - ic.bump_center) ** 2) / (2.0 * ic.bump_variance))
            ut[..., 0] += b.reshape(-1, *([1] * q0.ndim))
        if ic.v_noise:
            noise = rng.normal(size=ut.shape)
            env = np.exp(-(fr.z / 5.0) ** 2).reshape(-1, *([1] * (ut.ndim - 1)))
            noise *= env
            noise[0] = noise[-1] = 0.0
            _, noise = proj.project(noise)
            ut += ic.v_noise * noise / np.max(np.abs(noise))
        return ut

    def run_simulate(self):
        fr0 = self._load_front()
        spec = self._load_weight()
        fr = self._sim_front(fr0)
        sim_cfg = self.cfg.sim.to_sim_config()
        e = projection.compute_adjoint(self.sys, fr, spec)
        delta0 = self.cfg.analysis.delta0
        proj = projection.Projector(fr, e, delta0=delta0)
        rng = np.random.default_rng(self.cfg.seed)
        ut = self.initial_field(fr, proj, sim_cfg, rng)
        snap_dir = self._path("snapshots") if sim_cfg.snapshot_stride else None
        t0 = time.time()
        series = simulate_perturbed_front(self.sys, fr, spec, ut, sim_cfg, e_tilde=e, delta0=delta0,
                                          out_dir=snap_dir)
        log.info("simulate: %d outputs in %.1f s", len(series.records), time.time() - t0)
        series.to_csv(self._path("series.csv"))
        meta = dict(series.meta)
        meta.update({"E_k": series.E_k, "T_exit": series.T_exit, "breakdown_time": series.breakdown_time,
                     "k": series.k, "c": fr.c, "n_z": fr.n_nodes, "L_z": fr.L})
        _dump(self._path("simulation.json"), meta)
        self.claims.append(claim("projection_invariant", meta["max_pi_v"] < 1e-6,
                                 {"max_pi_v": meta["max_pi_v"], "max_seam_fraction": meta["max_seam_fraction"]},
                                 1e-6))
        return series

    def _load_series(self):
        with open(self._require("series.csv", "simulate")) as fh:
            text = fh.read()
        with open(self._require("simulation.json", "simulate")) as fh:
            meta = json.load(fh)
        E = meta.get("E_k")
        s = norms.NormSeries.from_csv(text, k=meta.get("k", 2), E_k=float(E) if E is not None else float("nan"))
        s.T_exit, s.breakdown_time = meta.get("T_exit"), meta.get("breakdown_time")
        return s

    def run_verify(self):
        acfg = self.cfg.analysis.to_analysis_config()
        d = self.cfg.sim.d
        series = self._load_series()
        rep = analysis.decay_report(series, d, acfg)
        checks = rep["checks"]
        tol_rate = {"t_calibrate": acfg.t_calibrate}
        self.claims.append(claim("theorem_main_item2", rep["ball_ok"],
                                 {"T_exit": rep["T_exit"], "breakdown_time": rep["breakdown_time"]},
                                 {"delta": self.cfg.sim.delta}))
        for item, col in ((3, "v_hka"), (4, "q_hk"), (5, "w_hk"), (7, "v2_hk")):
            c = checks[col]
            self.claims.append(claim(f"theorem_main_item{item}", c["passed"],
                                     {**c, "fit": rep["fits"].get(col), "E_k": rep["E_k"]},
                                     {**tol_rate, "rate": c["rate"]}))
        if "v1_hk" in checks:
            c = checks["v1_hk"]
            self.claims.append(claim("theorem_main_item6", c["passed"], c, {"factor": acfg.v1_factor}))
        if acfg.contrast and "contrast" in rep:
            c = rep["contrast"]
            self.claims.append(claim("convective_contrast", c["passed"],
                                     {"gap": c["gap"], "v_hk": rep["fits"]["v_hk"]["exponent"],
                                      "v_hka": rep["fits"]["v_hka"]["exponent"]}, c["required"]))
        extra = {}
        sec = self.cfg.analysis
        if sec.nonlinear or sec.semigroup:
            fr = self._load_front()
            spec = self._load_weight()
        if sec.nonlinear:
            e = projection.compute_adjoint(self.sys, fr, spec)
            r = analysis.verify_nonlinear_bounds(self.sys, fr, spec, e, acfg, seed=self.cfg.seed)
            extra["nonlinear"] = r
            self.claims.append(claim("nonlinear_bounds", r["passed"],
                                     {"degrees": r["degrees"], "ratios": r["ratios"],
                                      "identity_residual": r["identity_residual"]},
                                     {"degree": acfg.degree_tol, "identity": acfg.identity_tol}))
        if sec.semigroup:
            r = analysis.verify_semigroup_bounds(self.sys, fr, spec, acfg, d=d)
            extra["semigroup"] = r
            self.claims.append(claim("semigroup_bounds", r["passed"], r, {"heat": list(acfg.heat_tol)}))
        if sec.integral:
            r = analysis.verify_integral_inequalities()
            extra["integral"] = r
            self.claims.append(claim("integral_inequalities", r["passed"],
                                     {k: v["n_bounded"] for k, v in r.items() if k.startswith("clause")}, None))
        _dump(self._path("verification.json"), {"decay": rep, **extra})
        return rep

    def run(self, stage):
        stages = STAGES if stage == "all" else (stage,)
        for st in stages:
            getattr(self, f"run_{st}")()
        return write_report({"claims": self.claims}, self.out)


def run_pipeline(config_path, stage, out=None, seed=None):
    """Returns (exit code, report or None)."""
    try:
        cfg = load_config(config_path)
    except (OSError, ValueError, ValidationError) as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE, None
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": int(seed)})
    out_dir = out or cfg.out_dir
    try:
        report = Pipeline(cfg, out_dir).run(stage)
    except MissingArtifact as exc:
        log.error("%s", exc)
        return EXIT_USAGE, None
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC, None
    except (LabError, ValueError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_USAGE, None
    if report["failing"]:
        log.error("failing claims: %s", ", ".join(report["failing"]))
        return EXIT_CHECK, report
    return EXIT_OK, report


def _limit_threads():
    n = os.environ.get("FSL_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(1, int(n)))


def build_parser():
    p = argparse.ArgumentParser(prog="front-stability-lab")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run pipeline stages from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--stage", required=True, choices=STAGES + ("all",))
    r.add_argument("--out", default=None)
    r.add_argument("--seed", type=int, default=None)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("seed must be an unsigned 64-bit integer")
        return EXIT_USAGE
    _limit_threads()
    code, _ = run_pipeline(args.config, args.stage, args.out, args.seed)
    return code


if __name__ == "__main__":
    _sys.exit(main())
