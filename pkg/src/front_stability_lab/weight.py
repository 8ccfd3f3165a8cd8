"""Two-sided exponential weights gamma = exp(sigma(z)).

sigma is linear outside [-1, 1] (slopes alpha_minus, alpha_plus) and a quintic
Hermite bridge inside, matching value and two derivatives at both joints.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import RangeError

BRIDGE = {"kind": "quintic-hermite", "interval": [-1.0, 1.0]}


@dataclass(frozen=True)
class WeightSpec:
    alpha_minus: float = 0.0
    alpha_plus: float = 0.0
    bridge: dict = field(default_factory=lambda: dict(BRIDGE), compare=False, hash=False)

    def as_dict(self):
        return {"alpha_minus": float(self.alpha_minus), "alpha_plus": float(self.alpha_plus),
                "bridge": dict(self.bridge)}


def _bridge_coeffs(am, ap):
    # p(z) = sum c_k z^k on [-1, 1]; rows: p, p', p'' at -1 and +1
    rows, rhs = [], []
    for z0, a in ((-1.0, am), (1.0, ap)):
        rows.append([z0**k for k in range(6)])
        rows.append([k * z0 ** (k - 1) if k >= 1 else 0.0 for k in range(6)])
        rows.append([k * (k - 1) * z0 ** (k - 2) if k >= 2 else 0.0 for k in range(6)])
        rhs += [a * z0, a, 0.0]
    return np.linalg.solve(np.array(rows), np.array(rhs))


class WeightFunction:
    def __init__(self, spec: WeightSpec, offset: float = 0.0):
        self.spec = spec
        self.offset = float(offset)  # sigma -> sigma + offset, a pure rescaling of gamma
        self._p = np.polynomial.Polynomial(_bridge_coeffs(spec.alpha_minus, spec.alpha_plus))
        self._dp = self._p.deriv()
        self._ddp = self._dp.deriv()

    def sigma(self, z, order=0):
        z = np.asarray(z, dtype=float)
        am, ap = self.spec.alpha_minus, self.spec.alpha_plus
        inner = np.abs(z) < 1.0
        if order == 0:
            out = np.where(z <= -1.0, am * z, ap * z) + self.offset
            poly = self._p(z) + self.offset
        elif order == 1:
            out = np.where(z <= -1.0, am, ap) * np.ones_like(z)
            poly = self._dp(z)
        elif order == 2:
            out = np.zeros_like(z)
            poly = self._ddp(z)
        else:
            raise ValueError("only sigma, sigma', sigma'' are available")
        return np.where(inner, poly, out)

    def __call__(self, z):
        return weight_eval(self, z)


def weight_eval(wf: WeightFunction, z, log: bool = False):
    """gamma(z) = exp(sigma(z)); with log=True return sigma itself."""
    s = wf.sigma(z)
    if log:
        return s
    if np.max(np.abs(s)) > 700.0:
        raise RangeError("weight exponent exceeds 700; evaluate with log=True")
    return np.exp(s)
