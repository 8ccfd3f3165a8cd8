"""Traveling-front boundary value problem and asymptotic rates.

We solve 0 = phi'' + c phi' + f(phi) on [-L, L] with phi(+-L) = phi_+- and a
phase condition pinning the midpoint of the largest-jump component at z = 0.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fd
from .errors import DegenerateFrontError, PreconditionError, SolverError
from .model import ReactionSystem

SCHEMA = "front/1"


@dataclass
class RateSet:
    roots: np.ndarray
    omega: float
    marginal: bool
    marginal_roots: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))


@dataclass
class FrontProfile:
    z: np.ndarray
    values: np.ndarray
    c: float
    phi_minus: np.ndarray
    phi_plus: np.ndarray
    omega_minus: Optional[float] = None
    omega_plus: Optional[float] = None
    transform: dict = field(default_factory=dict)
    iterations: int = 0
    residual: float = float("nan")
    jac_minus: Optional[np.ndarray] = None
    jac_plus: Optional[np.ndarray] = None
    deviation: Optional[np.ndarray] = None  # values - reference_state(), kept to relative precision

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        self.phi_minus = np.atleast_1d(np.asarray(self.phi_minus, dtype=float))
        self.phi_plus = np.atleast_1d(np.asarray(self.phi_plus, dtype=float))
        if self.jac_minus is not None:
            self.jac_minus = np.atleast_2d(np.asarray(self.jac_minus, dtype=float))
        if self.jac_plus is not None:
            self.jac_plus = np.atleast_2d(np.asarray(self.jac_plus, dtype=float))
        if self.deviation is not None:
            self.deviation = np.asarray(self.deviation, dtype=float).reshape(self.values.shape)

    @property
    def n_nodes(self):
        return self.z.size

    @property
    def n(self):
        return self.values.shape[1]

    @property
    def h(self):
        return self.z[1] - self.z[0]

    @property
    def L(self):
        return float(self.z[-1])

    def derivative(self, order=1):
        return fd.dz(self.values, self.h, order=order, axis=0)

    def reference_state(self):
        """Piecewise-constant profile: phi_- left of the middle node, phi_+ from it on."""
        ref = np.empty_like(self.values)
        i0 = self.n_nodes // 2
        ref[:i0] = self.phi_minus
        ref[i0:] = self.phi_plus
        return ref

    def deviation_from(self, state):
        """values - state, accurate in the tail approaching ``state``."""
        if self.deviation is None:
            return self.values - state
        return (self.reference_state() - state) + self.deviation

    def presented(self):
        """Values shifted so that the state at -infinity is zero."""
        return self.values - self.phi_minus

    def to_json(self):
        doc = {
            "schema": SCHEMA,
            "grid": {"L": self.L, "h": self.h, "n_nodes": int(self.n_nodes)},
            "values": self.values.tolist(),
            "c": float(self.c),
            "phi_minus": self.phi_minus.tolist(),
            "phi_plus": self.phi_plus.tolist(),
            "omega": {"minus": self.omega_minus, "plus": self.omega_plus},
            "transform": self.transform,
            "jacobians": {
                "minus": None if self.jac_minus is None else self.jac_minus.tolist(),
                "plus": None if self.jac_plus is None else self.jac_plus.tolist(),
            },
        }
        if self.deviation is not None:
            doc["deviation"] = self.deviation.tolist()
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA:
            raise PreconditionError(f"expected schema {SCHEMA}, got {doc.get('schema')!r}")
        g = doc["grid"]
        z = np.linspace(-g["L"], g["L"], g["n_nodes"])
        return cls(z=z, values=np.array(doc["values"]), c=doc["c"],
                   phi_minus=doc["phi_minus"], phi_plus=doc["phi_plus"],
                   omega_minus=doc["omega"]["minus"], omega_plus=doc["omega"]["plus"],
                   transform=doc.get("transform", {}),
                   jac_minus=doc.get("jacobians", {}).get("minus"),
                   jac_plus=doc.get("jacobians", {}).get("plus"),
                   deviation=doc.get("deviation"))


def asymptotic_rates(sys: ReactionSystem, c: float, rest, side: str = "minus", tol: float = 1e-10) -> RateSet:
    """Spatial eigenvalues mu solving det(mu^2 + c mu + df(rest)) = 0.

    For side="minus" omega is minus the smallest positive real part (the front
    leaves the rest state along an unstable direction); for side="plus" it is
    |largest negative real part|. Roots on the imaginary axis are reported as
    marginal and skipped when choosing omega.
    """
    A = np.atleast_2d(sys.df(np.atleast_1d(np.asarray(rest, dtype=float))))
    n = A.shape[0]
    comp = np.block([[np.zeros((n, n)), np.eye(n)], [-A, -c * np.eye(n)]])
    roots = np.linalg.eigvals(comp)
    roots = roots[np.lexsort((roots.imag, roots.real))]
    on_axis = np.abs(roots.real) <= tol
    marginal = bool(np.any(on_axis))
    if side == "minus":
        cand = roots.real[roots.real > tol]
        omega = -float(cand.min()) if cand.size else float("nan")
    elif side == "plus":
        cand = roots.real[roots.real < -tol]
        omega = float(-cand.max()) if cand.size else float("nan")
    else:
        raise ValueError("side must be 'minus' or 'plus'")
    return RateSet(roots=roots, omega=omega, marginal=marginal, marginal_roots=roots[on_axis])


def _operators(n_nodes, h):
    return fd.d1_matrix(n_nodes, h), fd.d2_matrix(n_nodes, h)


def bvp_residual(sys, values, c, h, D1=None, D2=None):
    """Residual of phi'' + c phi' + f(phi) at interior nodes, shape (N-2, n)."""
    N = values.shape[0]
    if D1 is None:
        D1, D2 = _operators(N, h)
    D = sys.diffusion
    R = (D2 @ values) * D + c * (D1 @ values) + sys.f(values)
    return R[1:-1]


def residual_2nd_order(sys, front: FrontProfile):
    """Max defect of the 2nd-order central scheme on a given profile."""
    N, h = front.n_nodes, front.h
    D1 = fd.d1_matrix_2nd(N, h)
    D2 = fd.d2_matrix_2nd(N, h)
    return float(np.max(np.abs(bvp_residual(sys, front.values, front.c, h, D1, D2))))


def phase_component(phi_minus, phi_plus):
    jump = np.abs(np.asarray(phi_plus) - np.asarray(phi_minus))
    return int(np.argmax(jump))


def tanh_guess(sys: ReactionSystem, L: float, n_nodes: int, c0: float = 0.5, width: float = 1.0,
               phi_minus=None, phi_plus=None) -> FrontProfile:
    phi_minus = np.asarray(sys.rest_states[0] if phi_minus is None else phi_minus, float)
    phi_plus = np.asarray(sys.rest_states[1] if phi_plus is None else phi_plus, float)
    z = np.linspace(-L, L, n_nodes)
    s = 0.5 * (1.0 + np.tanh(z / (2.0 * width)))
    values = phi_minus + s[:, None] * (phi_plus - phi_minus)
    return FrontProfile(z=z, values=values, c=c0, phi_minus=phi_minus, phi_plus=phi_plus)


def _resample(guess: FrontProfile, z):
    if guess.n_nodes == z.size and np.allclose(guess.z, z, rtol=0, atol=1e-14):
        return guess.values.copy()
    out = np.empty((z.size, guess.n))
    for j in range(guess.n):
        out[:, j] = np.interp(z, guess.z, guess.values[:, j],
                              left=guess.phi_minus[j], right=guess.phi_plus[j])
    return out


def default_half_length(sys, c, phi_minus, phi_plus):
    wm = asymptotic_rates(sys, c, phi_minus, "minus").omega
    wp = asymptotic_rates(sys, c, phi_plus, "plus").omega
    rates = [abs(w) for w in (wm, wp) if np.isfinite(w) and w != 0]
    if not rates:
        raise PreconditionError("no hyperbolic tail rate available to size the domain")
    return 40.0 / min(rates)


def solve_front(sys: ReactionSystem, guess: FrontProfile, L: Optional[float] = None, tol: float = 1e-10,
                n_nodes: Optional[int] = None, max_iter: int = 60) -> FrontProfile:
    """Newton collocation for profile and speed."""
    phi_minus, phi_plus = guess.phi_minus, guess.phi_plus
    if np.max(np.abs(phi_plus - phi_minus)) < 1e-12:
        raise DegenerateFrontError("guess connects identical states")
    if L is None:
        L = guess.L
    if n_nodes is None:
        n_nodes = int(round(2 * L / guess.h)) + 1
    if n_nodes % 2 == 0:
        n_nodes += 1
    z, h = fd.uniform_grid(L, n_nodes)
    n = sys.n
    U = _resample(guess, z)
    U[0], U[-1] = phi_minus, phi_plus
    c = float(guess.c)
    j = phase_component(phi_minus, phi_plus)
    mid = 0.5 * (phi_minus[j] + phi_plus[j])
    i0 = n_nodes // 2

    D1, D2 = _operators(n_nodes, h)
    In = sp.identity(n, format="csr")
    Dd = sp.diags(sys.diffusion)
    K2 = sp.kron(D2[1:-1, 1:-1], Dd, format="csr")
    K1 = sp.kron(D1[1:-1, 1:-1], In, format="csr")
    m = (n_nodes - 2) * n
    phase_row = sp.csr_matrix(([1.0], ([0], [(i0 - 1) * n + j])), shape=(1, m + 1))

    def full_residual(U, c):
        R = bvp_residual(sys, U, c, h, D1, D2).ravel()
        return np.concatenate([R, [U[i0, j] - mid]])

    F = full_residual(U, c)
    res = np.max(np.abs(F))
    it = 0
    while res > tol:
        if it >= max_iter:
            raise SolverError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})",
                              residual=res)
        J_f = sys.df(U[1:-1])
        blocks = sp.block_diag(list(J_f), format="csr") if n > 1 else sp.diags(J_f[:, 0, 0])
        dc = (D1 @ U)[1:-1].ravel()
        top = sp.hstack([K2 + c * K1 + blocks, sp.csr_matrix(dc[:, None])])
        J = sp.vstack([top, phase_row], format="csc")
        try:
            step = spla.spsolve(J, -F)
        except RuntimeError as exc:
            raise SolverError(f"singular Newton system: {exc}", residual=res) from exc
        if not np.all(np.isfinite(step)):
            raise SolverError("Newton step is not finite", residual=res)
        lam = 1.0
        norm0 = np.linalg.norm(F)
        while True:
            Un = U.copy()
            Un[1:-1] += lam * step[:m].reshape(-1, n)
            cn = c + lam * step[m]
            Fn = full_residual(Un, cn)
            if np.linalg.norm(Fn) < (1.0 - 1e-4 * lam) * norm0 or lam < 1e-3:
                break
            lam *= 0.5
        U, c, F = Un, cn, Fn
        res = np.max(np.abs(F))
        it += 1

    # Near phi_+ the stored values are phi_+ + tiny and lose the tiny part to
    # rounding. Re-solve for d = U - ref with ref piecewise constant, so the
    # tails carry relative precision.
    ref = np.empty_like(U)
    ref[:i0], ref[i0:] = phi_minus, phi_plus
    # stencil rows do not sum to exactly zero, so apply D to ref - phi_+- on
    # each side to get exact zeros away from the jump
    side = (np.arange(n_nodes) >= i0)[:, None]

    def apply_ref(D):
        return np.where(side, D @ (ref - phi_plus), D @ (ref - phi_minus))

    D1ref, D2ref = apply_ref(D1), apply_ref(D2)
    d = U - ref

    def dev_residual(d, c):
        Dr = sys.diffusion * D2ref + c * D1ref
        R = (Dr + sys.diffusion * (D2 @ d) + c * (D1 @ d) + sys.f(ref + d))[1:-1].ravel()
        return np.concatenate([R, [(ref[i0, j] - mid) + d[i0, j]]])

    for _ in range(3):
        J_f = sys.df(ref[1:-1] + d[1:-1])
        blocks = sp.block_diag(list(J_f), format="csr") if n > 1 else sp.diags(J_f[:, 0, 0])
        dc = (D1 @ (ref + d))[1:-1].ravel()
        top = sp.hstack([K2 + c * K1 + blocks, sp.csr_matrix(dc[:, None])])
        J = sp.vstack([top, phase_row], format="csc")
        step = spla.spsolve(J, -dev_residual(d, c))
        d[1:-1] += step[:m].reshape(-1, n)
        c += step[m]
    U = ref + d

    wm = asymptotic_rates(sys, c, phi_minus, "minus").omega
    wp = asymptotic_rates(sys, c, phi_plus, "plus").omega
    return FrontProfile(z=z, values=U, c=c, phi_minus=phi_minus, phi_plus=phi_plus,
                        omega_minus=wm, omega_plus=wp,
                        transform={"shift": (-phi_minus).tolist(), "reflection": False},
                        iterations=it, residual=float(np.max(np.abs(full_residual(U, c)))),
                        jac_minus=sys.df(phi_minus), jac_plus=sys.df(phi_plus), deviation=d)


def continue_in_kappa(kappas, L: float, n_nodes: int, tol: float = 1e-10, mode: str = "theory"):
    """Combustion fronts along a kappa path, seeded from a tanh profile."""
    from .model import CombustionParams, combustion

    fronts = []
    prev = None
    for kappa in kappas:
        sys = combustion(CombustionParams(kappa=kappa), mode=mode)
        pm, pp = sys.rest_states
        if prev is None:
            guess = tanh_guess(sys, L, n_nodes, c0=0.5, width=2.0)
        else:
            # keep the shape of the previous profile, rescale to the new rest states
            s = (prev.values[:, 0] - prev.phi_minus[0]) / (prev.phi_plus[0] - prev.phi_minus[0])
            vals = pm + s[:, None] * (pp - pm)
            guess = FrontProfile(z=prev.z, values=vals, c=prev.c, phi_minus=pm, phi_plus=pp)
        prev = solve_front(sys, guess, L=L, tol=tol, n_nodes=n_nodes)
        fronts.append(prev)
    return fronts


def tail_fit(front: FrontProfile, floor: float = 1e-11):
    """Log-linear fits of the tail deviations on z <= -L/2 and z >= L/2.

    Returns dict side -> (slope, r2). Points below ``floor`` are dropped since
    they sit at round-off.
    """
    out = {}
    L = front.L
    for side, mask, ref in (("minus", front.z <= -L / 2, front.phi_minus),
                            ("plus", front.z >= L / 2, front.phi_plus)):
        dev = np.linalg.norm(front.values[mask] - ref, axis=1)
        zz = front.z[mask]
        keep = dev > floor
        # stay clear of the Dirichlet closure
        keep &= np.abs(zz) < 0.8 * L
        if keep.sum() < 5:
            out[side] = (float("nan"), float("nan"))
            continue
        x, y = zz[keep], np.log(dev[keep])
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        pred = A @ coef
        ss_res = np.sum((y - pred) ** 2)
        ss_tot = np.sum((y - y.mean()) ** 2)
        out[side] = (float(coef[0]), float(1.0 - ss_res / ss_tot))
    return out


def align_shift(a: FrontProfile, b: FrontProfile):
    """Optimal translation of b onto a and the L2 distance after it."""
    from scipy.interpolate import CubicSpline
    from scipy.optimize import minimize_scalar

    j = phase_component(a.phi_minus, a.phi_plus)
    spl = CubicSpline(b.z, b.values[:, j])
    inner = np.abs(a.z) < 0.5 * min(a.L, b.L)

    def dist(s):
        return np.sqrt(a.h * np.sum((a.values[inner, j] - spl(a.z[inner] + s)) ** 2))

    r = minimize_scalar(dist, bounds=(-5.0, 5.0), method="bounded", options={"xatol": 1e-12})
    return float(r.x), float(r.fun)
