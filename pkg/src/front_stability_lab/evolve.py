"""Time integration of u_t = Delta u + c u_z + f(u) around a front.

We evolve the perturbation u~ = u - phi with homogeneous Dirichlet data in z
and periodic transverse directions. One step is Strang split: exact heat
half-steps in y, and in between a Crank-Nicolson step for D u_zz + c u_z with
the reaction treated explicitly by Heun's predictor-corrector.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fd, norms
from .errors import BlowUpError, DecompositionError, PreconditionError
from .front import FrontProfile, bvp_residual
from .projection import AdjointNullvector, PerturbationState, Projector, compute_adjoint
from .weight import WeightFunction, WeightSpec

log = logging.getLogger(__name__)

SNAP_SCHEMA = "snap/1"


@dataclass
class SimConfig:
    d: int = 2
    n_y: Sequence[int] = (256,)
    L_y: Sequence[float] = (120.0,)
    dt: float = 0.05
    T_end: float = 50.0
    output_stride: int = 10
    k: Optional[int] = None
    delta: float = 1.0
    snapshot_stride: int = 0  # in outputs; 0 disables snapshots

    def __post_init__(self):
        if self.d not in (2, 3):
            raise PreconditionError("d must be 2 or 3")
        self.n_y = tuple(int(n) for n in np.atleast_1d(self.n_y))
        self.L_y = tuple(float(x) for x in np.atleast_1d(self.L_y))
        if len(self.n_y) != self.d - 1 or len(self.L_y) != self.d - 1:
            raise PreconditionError("transverse grid must have d-1 axes")
        if self.k is None:
            self.k = norms.default_order(self.d)

    @property
    def h_y(self):
        return tuple(L / n for L, n in zip(self.L_y, self.n_y))

    def y_axes(self):
        return [np.arange(n) * (L / n) - L / 2 for n, L in zip(self.n_y, self.L_y)]

    def y_mesh(self):
        return np.meshgrid(*self.y_axes(), indexing="ij")


def _heat_symbol(shape, spacing):
    ks = [fd.wavenumbers(n, h) for n, h in zip(shape, spacing)]
    mesh = np.meshgrid(*ks, indexing="ij")
    return sum(k**2 for k in mesh)


def heat_propagate(u, t, spacing, gradient=False):
    """Apply e^{t Delta} on a periodic grid; with gradient=True also return grad."""
    u = np.asarray(u, dtype=float)
    spacing = np.atleast_1d(spacing)
    if t < 0:
        raise PreconditionError("t must be nonnegative")
    xi2 = _heat_symbol(u.shape, spacing)
    U = np.fft.fftn(u) * np.exp(-xi2 * t)
    out = np.fft.ifftn(U).real
    if not gradient:
        return out
    grads = []
    ks = [fd.wavenumbers(n, h) for n, h in zip(u.shape, spacing)]
    mesh = np.meshgrid(*ks, indexing="ij")
    for kk, n in zip(mesh, u.shape):
        mult = 1j * kk
        grads.append(np.fft.ifftn(U * mult).real)
    return out, np.stack(grads, axis=-1)


def dt_max(sys, front: FrontProfile):
    J = sys.df(front.values)
    rho = max(float(np.max(np.abs(np.linalg.eigvals(J)))), 1e-12)
    bound = 1.0 / rho
    if abs(front.c) > 0:
        bound = min(bound, front.h / abs(front.c))
    return bound


class Stepper:
    """Holds factorizations for a fixed (front, dt, transverse grid)."""

    def __init__(self, sys, front: FrontProfile, dt: float, n_y, spacing_y, residual: bool = False,
                 check_dt: bool = True):
        if check_dt and dt > dt_max(sys, front) * (1 + 1e-12):
            raise PreconditionError(f"dt={dt} exceeds stability bound {dt_max(sys, front):.4g}")
        self.sys, self.front, self.dt = sys, front, dt
        N, h, c = front.n_nodes, front.h, front.c
        D1 = fd.d1_matrix(N, h)[1:-1, 1:-1]
        D2 = fd.d2_matrix(N, h)[1:-1, 1:-1]
        I = sp.identity(N - 2, format="csc")
        self.diff = np.asarray(sys.diffusion, dtype=float)
        self._lu, self._rhs = {}, {}
        for dcoef in np.unique(self.diff):
            Lz = (dcoef * D2 + c * D1).tocsc()
            self._lu[dcoef] = spla.splu((I - 0.5 * dt * Lz).tocsc())
            self._rhs[dcoef] = (I + 0.5 * dt * Lz).tocsr()
        self.n_y = tuple(n_y)
        self.spacing_y = tuple(spacing_y)
        xi2 = _heat_symbol(self.n_y, self.spacing_y)
        # per-component half-step multipliers, shape (*ny, n)
        self._half = np.exp(-0.5 * dt * xi2[..., None] * self.diff)
        phi = front.values
        self._phi = phi.reshape(N, *([1] * len(self.n_y)), front.n)
        R = np.zeros_like(phi)
        if residual:
            R[1:-1] = bvp_residual(sys, phi, c, h)
        self._R = R.reshape(self._phi.shape)
        self._f_phi = sys.f(self._phi)

    def nonlinear(self, ut):
        return self.sys.f(self._phi + ut) - self._f_phi + self._R

    def _heat_half(self, ut):
        axes = tuple(range(1, 1 + len(self.n_y)))
        U = np.fft.fftn(ut, axes=axes)
        return np.fft.ifftn(U * self._half[None], axes=axes).real

    def _cn(self, ut, forcing):
        out = np.zeros_like(ut)
        n = ut.shape[-1]
        for j in range(n):
            dcoef = self.diff[j]
            inner = ut[1:-1, ..., j].reshape(ut.shape[0] - 2, -1)
            rhs = self._rhs[dcoef] @ inner + self.dt * forcing[1:-1, ..., j].reshape(inner.shape)
            out[1:-1, ..., j] = self._lu[dcoef].solve(rhs).reshape(ut[1:-1, ..., j].shape)
        return out

    def step(self, ut):
        u1 = self._heat_half(ut)
        N0 = self.nonlinear(u1)
        pred = self._cn(u1, N0)
        N1 = self.nonlinear(pred)
        u2 = self._cn(u1, 0.5 * (N0 + N1))
        return self._heat_half(u2)


def step_imex(sys, front: FrontProfile, u, dt, spacing_y=(1.0,)):
    """One step on the full field u (layout (Nz, *ny, n)); returns the new u."""
    u = np.asarray(u, dtype=float)
    ny = u.shape[1:-1]
    st = Stepper(sys, front, dt, ny, tuple(spacing_y)[:len(ny)], check_dt=False)
    phi = st._phi
    ut = st.step(u - phi)
    if not np.all(np.isfinite(ut)):
        raise BlowUpError("non-finite values after one step", t_last=0.0)
    return ut + phi


def norm_record(t, state: PerturbationState, sys, front, wf, cfg: SimConfig):
    k = cfg.k
    spacing = (front.h,) + cfg.h_y
    per_q = (True,) * (cfg.d - 1)
    v = state.v
    v_hk = norms.sobolev_norm(v, k, spacing)
    v_hka = norms.sobolev_norm(v, k, spacing, weight=wf, z=front.z)
    n1 = sys.n1
    v1 = norms.sobolev_norm(v[..., :n1], k, spacing) if n1 > 0 else 0.0
    v2 = norms.sobolev_norm(v[..., n1:], k, spacing)
    return {
        "t": t, "v_hk": v_hk, "v_hka": v_hka, "v_H": max(v_hk, v_hka),
        "v1_hk": v1, "v2_hk": v2,
        "q_hk": norms.sobolev_norm(state.q, k, cfg.h_y, periodic=per_q),
        "q_l1": norms.l1_norm(state.q, cfg.h_y, periodic=per_q),
        "w_hk": norms.sobolev_norm(state.w, k, cfg.h_y, periodic=per_q),
    }


def seam_tail_fraction(q, frac=0.1):
    """Share of |q| mass in the outer band of the periodic box."""
    q = np.abs(np.asarray(q))
    mask = np.zeros(q.shape, dtype=bool)
    for ax, n in enumerate(q.shape):
        m = max(1, int(frac * n / 2))
        idx = [slice(None)] * q.ndim
        idx[ax] = np.r_[0:m, n - m:n]
        mask[tuple(idx)] = True
    total = q.sum()
    return float(q[mask].sum() / total) if total > 0 else 0.0


def _write_snapshot(out_dir, idx, t, ut, state, cfg, front):
    base = os.path.join(out_dir, f"snap_{idx:05d}")
    np.savez(base + ".npz", u_tilde=ut, v=state.v, q=state.q, w=state.w)
    manifest = {"schema": SNAP_SCHEMA, "t": t, "file": os.path.basename(base) + ".npz",
                "grid": {"L": front.L, "n_z": front.n_nodes, "L_y": list(cfg.L_y), "n_y": list(cfg.n_y)}}
    with open(base + ".json", "w") as fh:
        json.dump(manifest, fh, sort_keys=True)


def simulate_perturbed_front(sys, front: FrontProfile, alpha: WeightSpec, init, cfg: SimConfig,
                             e_tilde: Optional[AdjointNullvector] = None, delta0=None,
                             out_dir: Optional[str] = None) -> norms.NormSeries:
    """Integrate the perturbed front and record the norm series.

    ``init`` is a PerturbationState or a raw perturbation field.
    """
    e_tilde = e_tilde or compute_adjoint(sys, front, alpha)
    proj = Projector(front, e_tilde, delta0=delta0)
    wf = WeightFunction(alpha)
    shape = (front.n_nodes,) + cfg.n_y + (front.n,)
    if isinstance(init, PerturbationState):
        ut = proj.recompose(init)
    else:
        ut = np.asarray(init, dtype=float)
    if ut.shape != shape:
        raise PreconditionError(f"initial field shape {ut.shape} != {shape}")
    ut = ut.copy()
    ut[0] = 0.0
    ut[-1] = 0.0
    state0 = proj.decompose(ut, cfg.h_y)
    series = norms.NormSeries(k=cfg.k)
    series.E_k = norms.initial_energy(state0.v, state0.q, cfg.k, (front.h,) + cfg.h_y, cfg.h_y, wf, front.z)
    stepper = Stepper(sys, front, cfg.dt, cfg.n_y, cfg.h_y)
    n_steps = int(round(cfg.T_end / cfg.dt))
    max_pi, max_seam = 0.0, 0.0
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    out_idx = 0
    t = 0.0
    for step in range(n_steps + 1):
        if step % cfg.output_stride == 0 or step == n_steps:
            try:
                state = proj.decompose(ut, cfg.h_y)
                max_pi = max(max_pi, float(np.max(np.abs(proj.pi(state.v)))))
            except DecompositionError as exc:
                if series.breakdown_time is None:
                    series.breakdown_time = t
                    log.warning("modulation breakdown at t=%.3f: %s", t, exc)
                qz = np.zeros(cfg.n_y)
                state = PerturbationState(ut, qz, np.zeros(cfg.n_y + (cfg.d - 1,)))
            rec = norm_record(t, state, sys, front, wf, cfg)
            series.append(rec)
            max_seam = max(max_seam, seam_tail_fraction(state.q))
            if series.T_exit is None and rec["v_H"] + rec["q_hk"] + rec["w_hk"] > cfg.delta:
                series.T_exit = t
            if out_dir and cfg.snapshot_stride and out_idx % cfg.snapshot_stride == 0:
                _write_snapshot(out_dir, out_idx, t, ut, state, cfg, front)
            out_idx += 1
        if step == n_steps:
            break
        ut = stepper.step(ut)
        t = (step + 1) * cfg.dt
        if not np.all(np.isfinite(ut)):
            raise BlowUpError(f"non-finite field at t={t:.4g}", t_last=t - cfg.dt)
    series.meta = {"max_pi_v": max_pi, "max_seam_fraction": max_seam, "alpha": alpha.as_dict(),
                   "sim": asdict(cfg), "mode": sys.mode}
    return series
