"""Reaction terms with product-triangular structure.

All maps are vectorised: a state array of shape (..., n) gives f of shape
(..., n) and df of shape (..., n, n).
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

# exp(-1/u) underflows well before this, so we clamp to avoid warnings.
_G_CUTOFF = 1.0 / 700.0


@dataclass(frozen=True)
class CombustionParams:
    kappa: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError("epsilon must lie in [0, 1)")


@dataclass(frozen=True)
class BistableParams:
    a: float = 0.7

    def __post_init__(self):
        if not 0.5 < self.a < 1.0:
            raise DomainError("threshold a must lie in (1/2, 1)")


@dataclass
class ReactionSystem:
    name: str
    n: int
    n1: int
    n2: int
    f: Callable
    df: Callable
    d2f: Callable
    A1: np.ndarray
    diffusion: np.ndarray
    rest_states: tuple = ()
    params: dict = field(default_factory=dict)
    mode: str = "theory"

    def __post_init__(self):
        if self.n1 + self.n2 != self.n:
            raise DomainError("n1 + n2 must equal n")
        self.A1 = np.asarray(self.A1, dtype=float).reshape(self.n1, self.n1)
        self.diffusion = np.asarray(self.diffusion, dtype=float)

    @property
    def identity_diffusion(self) -> bool:
        return bool(np.all(self.diffusion == 1.0))


def _check_finite(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("state contains non-finite entries")
    return u


def eval_f(sys: ReactionSystem, u):
    u = _check_finite(u)
    return sys.f(u)


def eval_jacobian(sys: ReactionSystem, u):
    u = _check_finite(u)
    return sys.df(u)


def eval_N(sys: ReactionSystem, u, v, quad_order: int = 8):
    """N(u, v) = int_0^1 df(u + s v) - df(u) ds by Gauss-Legendre."""
    if quad_order < 2:
        raise DomainError("quad_order must be at least 2")
    u = _check_finite(u)
    v = _check_finite(v)
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    s = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    base = sys.df(u)
    out = np.zeros(np.broadcast_shapes(base.shape, v.shape + (sys.n,)))
    for sk, wk in zip(s, weights):
        out += wk * (sys.df(u + sk * v) - base)
    return out


# -- combustion ---------------------------------------------------------------

def _g_derivs(x):
    """g(x) = exp(-1/x) for x > 0 (else 0) with its first two derivatives."""
    x = np.asarray(x, dtype=float)
    pos = x > _G_CUTOFF
    xs = np.where(pos, x, 1.0)
    g = np.where(pos, np.exp(-1.0 / xs), 0.0)
    g1 = np.where(pos, g / xs**2, 0.0)
    g2 = np.where(pos, g * (1.0 - 2.0 * xs) / xs**4, 0.0)
    return g, g1, g2


def combustion(params: Optional[CombustionParams] = None, mode: str = "theory") -> ReactionSystem:
    """Combustion model: u1 temperature, u2 fuel.

    Burned state (1/kappa, 0), unburned state (0, 1). With identity diffusion
    the quantity u1 + u2/kappa is conserved by the kinetics.
    """
    p = params or CombustionParams()
    kappa = p.kappa
    if mode not in ("theory", "exploration"):
        raise DomainError(f"unknown mode {mode!r}")
    diffusion = np.ones(2) if mode == "theory" else np.array([1.0, p.epsilon])

    def f(u):
        g, _, _ = _g_derivs(u[..., 0])
        r = u[..., 1] * g
        return np.stack([r, -kappa * r], axis=-1)

    def df(u):
        g, g1, _ = _g_derivs(u[..., 0])
        J = np.zeros(u.shape + (2,))
        J[..., 0, 0] = u[..., 1] * g1
        J[..., 0, 1] = g
        J[..., 1, 0] = -kappa * u[..., 1] * g1
        J[..., 1, 1] = -kappa * g
        return J

    def d2f(u):
        _, g1, g2 = _g_derivs(u[..., 0])
        T = np.zeros(u.shape + (2, 2))
        T[..., 0, 0, 0] = u[..., 1] * g2
        T[..., 0, 0, 1] = g1
        T[..., 0, 1, 0] = g1
        T[..., 1, :, :] = -kappa * T[..., 0, :, :]
        return T

    burned = np.array([1.0 / kappa, 0.0])
    unburned = np.array([0.0, 1.0])
    return ReactionSystem(
        name="combustion", n=2, n1=1, n2=1, f=f, df=df, d2f=d2f,
        A1=np.zeros((1, 1)), diffusion=diffusion,
        rest_states=(burned, unburned),
        params={"kappa": kappa, "epsilon": p.epsilon}, mode=mode,
    )


# -- bistable -----------------------------------------------------------------

def bistable(params: Optional[BistableParams] = None) -> ReactionSystem:
    """Scalar cubic u(1-u)(u-a); exact front 1/(1+exp(-z/sqrt 2))."""
    a = (params or BistableParams()).a

    def f(u):
        x = u[..., 0]
        return (x * (1.0 - x) * (x - a))[..., None]

    def df(u):
        x = u[..., 0]
        return (-3.0 * x**2 + 2.0 * (1.0 + a) * x - a)[..., None, None]

    def d2f(u):
        x = u[..., 0]
        return (-6.0 * x + 2.0 * (1.0 + a))[..., None, None, None]

    return ReactionSystem(
        name="bistable", n=1, n1=0, n2=1, f=f, df=df, d2f=d2f,
        A1=np.zeros((0, 0)), diffusion=np.ones(1),
        rest_states=(np.array([0.0]), np.array([1.0])),
        params={"a": a},
    )


def bistable_exact(z, a=0.7):
    """Closed-form bistable front and speed."""
    z = np.asarray(z, dtype=float)
    return 1.0 / (1.0 + np.exp(-z / np.sqrt(2.0))), np.sqrt(2.0) * (a - 0.5)


def build_system(name: str, params: dict, mode: str = "theory") -> ReactionSystem:
    if name == "combustion":
        return combustion(CombustionParams(**params), mode=mode)
    if name == "bistable":
        return bistable(BistableParams(**params))
    raise DomainError(f"unknown model {name!r}")
