"""Adjoint nullvector, the projections pi/P/Q and the (v, q) decomposition.

Fields on the (z, y) grid have layout (Nz, *ny, n); scalar fields on the
transverse grid have layout (*ny).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import make_interp_spline

from . import fd
from .errors import DecompositionError, RangeError, ShapeError, SimplicityError
from .front import FrontProfile
from .spectrum import conjugated_operator
from .weight import WeightFunction, WeightSpec


@dataclass
class AdjointNullvector:
    z: np.ndarray
    values: np.ndarray  # (Nz, n), zero at the Dirichlet nodes
    normalization_residual: float
    eigenvalue: complex
    weighted: np.ndarray  # gamma^{-1} e_tilde


@dataclass
class PerturbationState:
    v: np.ndarray
    q: np.ndarray
    w: np.ndarray  # (*ny, d-1)


def compute_adjoint(sys, front: FrontProfile, alpha: Optional[WeightSpec] = None,
                    shift: float = 1e-3, simple_tol: float = 1e-3) -> AdjointNullvector:
    """Left nullvector l of the conjugated operator, e_tilde = gamma * l."""
    alpha = alpha or WeightSpec(0.0, 0.0)
    M = conjugated_operator(sys, front, alpha)
    MT = M.T.tocsc()
    size = MT.shape[0]
    k = min(3, size - 2)
    vals, vecs = spla.eigs(MT, k=k, sigma=shift, which="LM", tol=0)
    near = np.abs(vals) < simple_tol
    if near.sum() != 1:
        raise SimplicityError(f"{int(near.sum())} eigenvalues within {simple_tol} of 0: {vals}")
    i = int(np.argmin(np.abs(vals)))
    lam = vals[i]
    l = vecs[:, i]
    # polish by inverse iteration with the real shifted matrix
    lu = spla.splu((MT - shift * sp.identity(size, format="csc")).tocsc())
    l = np.real(l / l[np.argmax(np.abs(l))])
    for _ in range(4):
        l = lu.solve(l)
        l /= np.linalg.norm(l)
    n = front.n
    wf = WeightFunction(alpha)
    gam = np.exp(wf.sigma(front.z))
    lfull = np.zeros((front.n_nodes, n))
    lfull[1:-1] = l.reshape(-1, n)
    e = gam[:, None] * lfull
    dphi = front.derivative(1)
    wz = fd.trapezoid_weights(front.n_nodes, front.h)
    s = float(np.sum(wz[:, None] * e * dphi))
    e /= s
    lfull /= s
    resid = abs(float(np.sum(wz[:, None] * e * dphi)) - 1.0)
    return AdjointNullvector(z=front.z, values=e, normalization_residual=resid,
                             eigenvalue=complex(lam), weighted=lfull)


def adjoint_residual(sys, front, e: AdjointNullvector, trim: int = 6):
    """||L1^* e|| / ||e|| for the unweighted discrete adjoint.

    The transposed one-sided closures are not adjoint-consistent, so ``trim``
    rows next to each Dirichlet end (the closure footprint) are left out.
    """
    M = conjugated_operator(sys, front, WeightSpec(0.0, 0.0))
    inner = e.values[1:-1].ravel()
    r = (M.T @ inner).reshape(-1, front.n)
    if trim:
        r = r[trim:-trim]
    return float(np.linalg.norm(r) / np.linalg.norm(inner))


def _check_grid(U, e: AdjointNullvector):
    U = np.asarray(U)
    if U.shape[0] != e.values.shape[0] or U.shape[-1] != e.values.shape[1]:
        raise ShapeError(f"field shape {U.shape} incompatible with adjoint grid {e.values.shape}")
    return U


def pi_alpha(U, e: AdjointNullvector):
    """(pi U)(y) = int (e_tilde(s), U(s, y)) ds, trapezoid in z."""
    U = _check_grid(U, e)
    h = e.z[1] - e.z[0]
    wz = fd.trapezoid_weights(e.z.size, h)
    ew = e.values * wz[:, None]  # (Nz, n)
    return np.tensordot(ew, U, axes=([0, 1], [0, U.ndim - 1]))


def _expand(profile, ndim_y):
    """(Nz, n) -> (Nz, 1, ..., 1, n)."""
    return profile.reshape(profile.shape[0], *([1] * ndim_y), profile.shape[1])


def project(U, front: FrontProfile, e: AdjointNullvector, dphi=None):
    U = _check_grid(U, e)
    p = pi_alpha(U, e)
    dphi = front.derivative(1) if dphi is None else dphi
    PU = _expand(dphi, U.ndim - 2) * np.asarray(p)[None, ..., None]
    return PU, U - PU


class Projector:
    """Caches the profile spline and derivatives for repeated decompositions."""

    def __init__(self, front: FrontProfile, e: AdjointNullvector, delta0: Optional[float] = None,
                 floor: float = 0.5):
        self.front = front
        self.e = e
        self.dphi = front.derivative(1)
        # spline the deviations from both rest states; each node uses the one
        # it approaches, so phi_q - phi keeps relative precision in both tails
        self._right = front.z >= 0
        self._devs = [front.deviation_from(front.phi_minus), front.deviation_from(front.phi_plus)]
        self._splines = [make_interp_spline(front.z, dv, k=5, axis=0) for dv in self._devs]
        self._dev = np.where(self._right[:, None], self._devs[1], self._devs[0])
        self.delta0 = default_delta0(front) if delta0 is None else float(delta0)
        self.floor = floor

    # shifted profiles phi(z - q(y)) with layout (Nz, *ny, n)
    def _args(self, q):
        q = np.asarray(q, dtype=float)
        zz = self.front.z.reshape(-1, *([1] * q.ndim)) - q[None, ...]
        return np.clip(zz, -self.front.L, self.front.L)

    def _eval(self, q, nu=0):
        args = self._args(q)
        right = self._right.reshape(-1, *([1] * (args.ndim)))
        left_val = self._splines[0](args, nu)
        right_val = self._splines[1](args, nu)
        return np.where(right, right_val, left_val)

    def phi_q(self, q):
        q = np.asarray(q, dtype=float)
        return self.shift_difference(q) + _expand(self.front.values, q.ndim)

    def shift_difference(self, q):
        """phi(z - q) - phi(z) without cancellation against the rest states."""
        q = np.asarray(q, dtype=float)
        return self._eval(q) - _expand(self._dev, q.ndim)

    def dphi_q(self, q):
        return self._eval(q, 1)

    def ddphi_q(self, q):
        return self._eval(q, 2)

    def phi_base(self, ndim_y):
        return _expand(self.front.values, ndim_y)

    def pi(self, U):
        return pi_alpha(U, self.e)

    def project(self, U):
        return project(U, self.front, self.e, self.dphi)

    def decompose(self, u_tilde, spacing_y, tol: float = 1e-12, max_iter: int = 30) -> PerturbationState:
        u_tilde = _check_grid(u_tilde, self.e)
        q = -self.pi(u_tilde)
        q = np.array(q, dtype=float)
        for it in range(max_iter):
            if np.max(np.abs(q)) > self.front.L / 4:
                raise DecompositionError("shift left the interpolation range")
            g = self.pi(u_tilde - self.shift_difference(q))
            dg = self.pi(self.dphi_q(q))
            if np.min(dg) < self.floor:
                raise DecompositionError(f"pi(phi'_q) = {np.min(dg):.3g} below floor {self.floor}")
            if np.max(np.abs(g)) < tol:
                break
            q = q - g / dg
        else:
            raise DecompositionError(f"shift Newton did not converge (|g| = {np.max(np.abs(g)):.3e})")
        if np.max(np.abs(q)) > self.delta0:
            raise DecompositionError(f"|q| = {np.max(np.abs(q)):.3g} exceeds delta0 = {self.delta0:.3g}")
        _, v = self.project(u_tilde - self.shift_difference(q))
        w = transverse_gradient(q, spacing_y)
        return PerturbationState(v=v, q=q, w=w)

    def recompose(self, state: PerturbationState):
        q = np.asarray(state.q, dtype=float)
        if np.max(np.abs(q), initial=0.0) > self.front.L / 4:
            raise RangeError("shift exceeds L/4")
        return self.shift_difference(q) + state.v


def transverse_gradient(q, spacing_y):
    q = np.asarray(q, dtype=float)
    spacing_y = np.atleast_1d(spacing_y)
    comps = [fd.dy_spectral(q, spacing_y[i], order=1, axis=i) for i in range(q.ndim)]
    return np.stack(comps, axis=-1)


def default_delta0(front: FrontProfile):
    """0.1 x front width, width = largest jump / max |phi'|."""
    jump = np.abs(front.phi_plus - front.phi_minus)
    j = int(np.argmax(jump))
    slope = np.max(np.abs(front.derivative(1)[:, j]))
    return 0.1 * jump[j] / slope


def decompose(u_tilde, front, e_tilde, spacing_y, tol: float = 1e-12, delta0=None) -> PerturbationState:
    return Projector(front, e_tilde, delta0=delta0).decompose(u_tilde, spacing_y, tol=tol)


def recompose(state: PerturbationState, front, e_tilde=None):
    if e_tilde is None:
        e_tilde = AdjointNullvector(front.z, np.zeros_like(front.values), 0.0, 0j, np.zeros_like(front.values))
    return Projector(front, e_tilde, delta0=np.inf).recompose(state)
