"""Essential spectra under exponential weights and the discrete 1D spectrum.

Weighted spectra are computed by conjugation: with gamma = exp(sigma),
gamma L gamma^{-1} = d_zz + (c - 2 sigma') d_z + (sigma'^2 - sigma'' - c sigma') + df(phi).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fd
from .errors import EigensolverError, PreconditionError
from .front import FrontProfile
from .model import ReactionSystem
from .weight import WeightFunction, WeightSpec

DENSE_LIMIT = 2000


@dataclass
class DispersionCurve:
    theta_grid: np.ndarray
    branches: np.ndarray  # (n_theta, n) complex
    side: str
    alpha: float

    def max_real(self):
        return float(np.max(self.branches.real))

    def to_csv(self, path=None):
        lines = ["theta,branch_index,re_lambda,im_lambda"]
        for i, th in enumerate(self.theta_grid):
            for j, lam in enumerate(self.branches[i]):
                lines.append(f"{th:.12e},{j},{lam.real:.12e},{lam.imag:.12e}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def default_theta_grid(c, n_points=1025):
    # odd count so that theta = 0 is a node
    T = 20.0 * max(abs(c), 1.0)
    return np.linspace(-T, T, n_points)


def dispersion_curves(A, c, alpha, theta_grid=None, side="minus", diffusion=None) -> DispersionCurve:
    """Eigenvalues of the weighted constant-coefficient symbol at a rest state.

    With D the diffusion matrix the symbol is
    A + D(alpha^2 - theta^2 - 2 i theta alpha) + c(i theta - alpha).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    theta = default_theta_grid(c) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if diffusion is None or np.all(np.asarray(diffusion) == 1.0):
        mu = np.sort_complex(np.linalg.eigvals(A).astype(complex))
        shift = (-theta**2 + alpha**2 - c * alpha) + 1j * theta * (c - 2.0 * alpha)
        branches = mu[None, :] + shift[:, None]
    else:
        D = np.diag(np.asarray(diffusion, dtype=float))
        branches = np.empty((theta.size, n), dtype=complex)
        for i, th in enumerate(theta):
            S = A + D * (alpha**2 - th**2 - 2j * th * alpha) + c * (1j * th - alpha) * np.eye(n)
            branches[i] = np.sort_complex(np.linalg.eigvals(S))
    return DispersionCurve(theta_grid=theta, branches=branches, side=side, alpha=float(alpha))


def _rest_jacobians(front: FrontProfile):
    if front.jac_minus is None or front.jac_plus is None:
        raise PreconditionError("front carries no rest-state Jacobians")
    return front.jac_minus, front.jac_plus


def side_abscissa(A, c, alpha):
    mu = np.linalg.eigvals(np.atleast_2d(A))
    return float(np.max(mu.real) + alpha**2 - c * alpha)


def essential_abscissa(front: FrontProfile, alpha: WeightSpec) -> float:
    """Closed form max_j Re mu_j(A+-) + alpha+-^2 - c alpha+- over both sides."""
    Am, Ap = _rest_jacobians(front)
    return max(side_abscissa(Am, front.c, alpha.alpha_minus),
               side_abscissa(Ap, front.c, alpha.alpha_plus))


def sampled_abscissa(front: FrontProfile, alpha: WeightSpec, theta_grid=None) -> float:
    Am, Ap = _rest_jacobians(front)
    cm = dispersion_curves(Am, front.c, alpha.alpha_minus, theta_grid, "minus")
    cp = dispersion_curves(Ap, front.c, alpha.alpha_plus, theta_grid, "plus")
    return max(cm.max_real(), cp.max_real())


def conjugated_operator(sys: ReactionSystem, front: FrontProfile, alpha: Optional[WeightSpec] = None,
                        offset: float = 0.0):
    """Sparse matrix of gamma L1 gamma^{-1} on interior nodes (node-major layout)."""
    alpha = alpha or WeightSpec(0.0, 0.0)
    wf = WeightFunction(alpha, offset=offset)
    N, h, n, c = front.n_nodes, front.h, front.n, front.c
    z = front.z[1:-1]
    s1, s2 = wf.sigma(z, 1), wf.sigma(z, 2)
    D1 = fd.d1_matrix(N, h)[1:-1, 1:-1]
    D2 = fd.d2_matrix(N, h)[1:-1, 1:-1]
    In = sp.identity(n, format="csr")
    Dd = sp.diags(sys.diffusion)
    if not sys.identity_diffusion:
        raise PreconditionError("conjugated operator assumes identity diffusion")
    conv = sp.diags(c - 2.0 * s1) @ D1
    pot = sp.diags(s1**2 - s2 - c * s1)
    J = sys.df(front.values[1:-1])
    react = sp.block_diag(list(J), format="csr") if n > 1 else sp.diags(J[:, 0, 0])
    M = sp.kron(D2, Dd) + sp.kron(conv, In) + sp.kron(pot, In) + react
    return M.tocsr()


def discrete_spectrum_1d(sys: ReactionSystem, front: FrontProfile, alpha: Optional[WeightSpec] = None,
                         n_eigs: int = 30, offset: float = 0.0, left: bool = False):
    """Eigenvalues (sorted by decreasing real part) and eigenvectors.

    Dense for matrices up to DENSE_LIMIT, otherwise shift-invert near 0.
    Eigenvectors are columns in the interior node-major layout.
    """
    M = conjugated_operator(sys, front, alpha, offset)
    if left:
        M = M.T.tocsr()
    size = M.shape[0]
    try:
        if size <= DENSE_LIMIT:
            vals, vecs = sla.eig(M.toarray())
        else:
            k = min(n_eigs, size - 2)
            vals, vecs = spla.eigs(M.tocsc(), k=k, sigma=1e-8, which="LM")
    except (np.linalg.LinAlgError, spla.ArpackError, RuntimeError) as exc:
        raise EigensolverError(f"eigensolve failed (size={size}, h={front.h:.3g}, L={front.L:.3g}): {exc}") from exc
    order = np.argsort(-vals.real)
    return vals[order], vecs[:, order]


def translational_eigen(sys, front, alpha=None):
    """Eigenvalue closest to 0, its eigenvector, and cosine similarity with gamma phi'."""
    vals, vecs = discrete_spectrum_1d(sys, front, alpha)
    i = int(np.argmin(np.abs(vals)))
    wf = WeightFunction(alpha or WeightSpec(0.0, 0.0))
    ref = (front.derivative(1)[1:-1] * np.exp(wf.sigma(front.z[1:-1]))[:, None]).ravel()
    v = vecs[:, i]
    cos = abs(np.vdot(v, ref)) / (np.linalg.norm(v) * np.linalg.norm(ref))
    return vals[i], v, float(cos), vals


@dataclass
class Admissibility:
    clause1: bool
    clause2: bool
    clause3: bool
    clause4: bool
    abscissa: float
    n_near: int
    lambda0: complex

    @property
    def admissible(self):
        return self.clause1 and self.clause2 and self.clause3 and self.clause4

    def as_dict(self):
        return {"clause1": self.clause1, "clause2": self.clause2, "clause3": self.clause3,
                "clause4": self.clause4, "abscissa": self.abscissa, "n_near": self.n_near,
                "lambda0": [float(np.real(self.lambda0)), float(np.imag(self.lambda0))],
                "admissible": self.admissible}


def weight_admissibility(sys, front: FrontProfile, alpha: WeightSpec, nu: float,
                         eig_tol: float = 1e-6) -> Admissibility:
    if not nu > 0:
        raise PreconditionError("nu must be positive")
    wm, wp = front.omega_minus, front.omega_plus
    if wm is None or wp is None or not np.isfinite(wm) or not np.isfinite(wp):
        raise PreconditionError("front lacks tail-rate data")
    am, ap = alpha.alpha_minus, alpha.alpha_plus
    c1 = bool(0.0 < am < -wm)
    c2 = bool(0.0 <= ap < wp)
    absc = essential_abscissa(front, alpha)
    c3 = bool(absc < -nu)
    vals, _ = discrete_spectrum_1d(sys, front, alpha)
    near = vals[vals.real >= -nu / 2]
    lam0 = near[np.argmin(np.abs(near))] if near.size else complex("nan")
    c4 = bool(near.size == 1 and abs(lam0) < eig_tol)
    return Admissibility(c1, c2, c3, c4, absc, int(near.size), complex(lam0))


@dataclass
class WeightSearch:
    found: bool
    spec: Optional[WeightSpec]
    abscissa: float
    margin: float


def find_weight(front: FrontProfile, nu_target: float, n_grid: int = 200) -> WeightSearch:
    """Grid search over (0, -omega_-) x [0, omega_+).

    A side that is already stable unweighted gets the smallest admissible
    exponent. The overall abscissa is a max over sides, so the remaining sides
    only need to reach the best value the weaker side can attain; each takes
    the smallest grid exponent that does. Small exponents keep the dynamic
    range of gamma, and hence round-off amplification, low.
    """
    if not nu_target > 0:
        raise PreconditionError("nu_target must be positive")
    Am, Ap = _rest_jacobians(front)
    c = front.c
    wm, wp = front.omega_minus, front.omega_plus
    if wm is None or wp is None or not (np.isfinite(wm) and np.isfinite(wp)) or wm >= 0 or wp <= 0:
        return WeightSearch(False, None, float("nan"), float("nan"))
    grid_m = -wm * np.arange(1, n_grid + 1) / (n_grid + 1)
    grid_p = wp * np.arange(0, n_grid) / n_grid

    sides = [(Am, grid_m), (Ap, grid_p)]
    curves = [np.array([side_abscissa(A, c, a) for a in grid]) for A, grid in sides]
    stable = [side_abscissa(A, c, 0.0) < -nu_target for A, _ in sides]
    best = [cv.min() for cv, st in zip(curves, stable) if not st]
    target = max(best) if best else -np.inf
    picks = []
    for (A, grid), cv, st in zip(sides, curves, stable):
        if st:
            picks.append(grid[0])
        else:
            ok = np.nonzero(cv <= target + 1e-12)[0]
            picks.append(grid[ok[0]])
    spec = WeightSpec(float(picks[0]), float(picks[1]))
    absc = essential_abscissa(front, spec)
    margin = -absc - nu_target
    return WeightSearch(bool(margin > 0), spec if margin > 0 else None, absc, margin)


def default_nu(c):
    return 0.1 * c * c


@dataclass
class HalfLines:
    """Union of horizontal half-lines {Re lam <= Re eta, Im lam = Im eta}."""
    anchors: np.ndarray

    def contains(self, lam, tol=1e-12):
        lam = complex(lam)
        hit = (np.abs(self.anchors.imag - lam.imag) <= tol) & (lam.real <= self.anchors.real + tol)
        return bool(np.any(hit))

    def describe(self):
        return [{"re_max": float(a.real), "im": float(a.imag)} for a in self.anchors]


def multidim_essential_set(curve_abscissae) -> HalfLines:
    """Each 1D spectral point eta generates eta - |xi|^2, xi in R^{d-1}."""
    return HalfLines(np.atleast_1d(np.asarray(curve_abscissae, dtype=complex)))
