"""Discrete Sobolev-type norms on (z, y) grids.

Spatial axes come first; any trailing axes are treated as state components.
Axis 0 is the bounded z-direction (4th-order differences) unless ``periodic``
says otherwise; the remaining spatial axes are periodic (Fourier).
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import fd
from .errors import ResolutionError
from .weight import WeightFunction, WeightSpec, weight_eval  # noqa: F401  (re-export)

SERIES_COLUMNS = ("t", "v_hk", "v_hka", "v_H", "v1_hk", "v2_hk", "q_hk", "q_l1", "w_hk")


def default_order(d: int) -> int:
    return math.ceil((d + 1) / 2)


@lru_cache(maxsize=32)
def _dz_mats(n, h):
    return fd.d1_matrix(n, h), fd.d2_matrix(n, h)


def _derivative(u, axis, order, h, periodic):
    if order == 0:
        return u
    if periodic:
        return fd.dy_spectral(u, h, order=order, axis=axis)
    n = u.shape[axis]
    D1, D2 = _dz_mats(n, h)
    moved = np.moveaxis(u, axis, 0)
    flat = moved.reshape(n, -1)
    k = order
    while k >= 2:
        flat = D2 @ flat
        k -= 2
    if k == 1:
        flat = D1 @ flat
    return np.moveaxis(np.asarray(flat).reshape(moved.shape), 0, axis)


def _resolve_periodic(ndim, periodic):
    if periodic is None:
        return (False,) + (True,) * (ndim - 1) if ndim > 1 else (False,)
    periodic = tuple(bool(p) for p in periodic)
    if len(periodic) != ndim:
        raise ValueError("periodic flags must match the number of spatial axes")
    return periodic


def _cell_weights(shape, spacing, periodic):
    w = np.ones(())
    for n, h, per in zip(shape, spacing, periodic):
        wi = np.full(n, h) if per else fd.trapezoid_weights(n, h)
        w = np.multiply.outer(w, wi)
    return w


def _pointwise_sq(u, ndim):
    sq = np.abs(u) ** 2
    while sq.ndim > ndim:
        sq = sq.sum(axis=-1)
    return sq


def _pointwise_abs(u, ndim):
    return np.sqrt(_pointwise_sq(u, ndim))


def l2_norm(u, spacing, periodic=None):
    spacing = tuple(np.atleast_1d(spacing).astype(float))
    periodic = _resolve_periodic(len(spacing), periodic)
    w = _cell_weights(u.shape[:len(spacing)], spacing, periodic)
    return float(np.sqrt(np.sum(w * _pointwise_sq(u, len(spacing)))))


def multi_indices(ndim, k):
    for total in range(k + 1):
        for beta in itertools.product(range(total + 1), repeat=ndim):
            if sum(beta) == total:
                yield beta


def apply_weight(field_, wf: WeightFunction, z):
    g = weight_eval(wf, z)
    shape = [1] * field_.ndim
    shape[0] = g.size
    return field_ * g.reshape(shape)


def sobolev_norm(field_, k: int, spacing, weight: Optional[WeightFunction] = None, z=None,
                 periodic=None) -> float:
    """Sum over |beta| <= k of the L2 norms of d^beta u (of gamma*u if weighted)."""
    u = np.asarray(field_)
    spacing = tuple(np.atleast_1d(spacing).astype(float))
    ndim = len(spacing)
    periodic = _resolve_periodic(ndim, periodic)
    if k < 0:
        raise ValueError("k must be nonnegative")
    for ax in range(ndim):
        if u.shape[ax] < 2 * k + 1 or (not periodic[ax] and u.shape[ax] < 7 and k > 0):
            raise ResolutionError(f"axis {ax} has {u.shape[ax]} nodes, too few for order {k}")
    if weight is not None:
        if z is None:
            raise ValueError("weighted norm needs the z grid")
        u = apply_weight(u, weight, z)
    w = _cell_weights(u.shape[:ndim], spacing, periodic)
    total = 0.0
    for beta in multi_indices(ndim, k):
        d = u
        for ax, order in enumerate(beta):
            d = _derivative(d, ax, order, spacing[ax], periodic[ax])
        total += np.sqrt(np.sum(w * _pointwise_sq(d, ndim)))
    return float(total)


def intersection_norm(field_, k, spacing, weight, z, periodic=None):
    """max(H^k, H^k_alpha) norm."""
    return max(sobolev_norm(field_, k, spacing, periodic=periodic),
               sobolev_norm(field_, k, spacing, weight=weight, z=z, periodic=periodic))


def l1_norm(u, spacing, periodic=None):
    spacing = tuple(np.atleast_1d(spacing).astype(float))
    periodic = _resolve_periodic(len(spacing), periodic)
    w = _cell_weights(u.shape[:len(spacing)], spacing, periodic)
    return float(np.sum(w * _pointwise_abs(u, len(spacing))))


def w11_norm(u, spacing, periodic=None):
    spacing = tuple(np.atleast_1d(spacing).astype(float))
    periodic = _resolve_periodic(len(spacing), periodic)
    total = l1_norm(u, spacing, periodic)
    for ax in range(len(spacing)):
        total += l1_norm(_derivative(u, ax, 1, spacing[ax], periodic[ax]), spacing, periodic)
    return total


def initial_energy(v0, q0, k, spacing_v, spacing_q, weight: WeightFunction, z):
    """E_k = |v0|_H + |q0|_{H^{k+1}} + |q0|_{W^{1,1}}; q lives on a periodic grid."""
    spacing_q = tuple(np.atleast_1d(spacing_q).astype(float))
    per_q = (True,) * len(spacing_q)
    return (intersection_norm(v0, k, spacing_v, weight, z)
            + sobolev_norm(q0, k + 1, spacing_q, periodic=per_q)
            + w11_norm(q0, spacing_q, periodic=per_q))


@dataclass
class NormSeries:
    k: int
    E_k: float = float("nan")
    records: list = field(default_factory=list)
    T_exit: Optional[float] = None
    breakdown_time: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def append(self, rec: dict):
        self.records.append({c: float(rec[c]) for c in SERIES_COLUMNS})

    def column(self, name):
        return np.array([r[name] for r in self.records])

    @property
    def times(self):
        return self.column("t")

    def running_sup(self, name):
        return np.maximum.accumulate(self.column(name))

    def to_csv(self, path=None):
        lines = [",".join(SERIES_COLUMNS)]
        for r in self.records:
            lines.append(",".join(f"{r[c]:.12e}" for c in SERIES_COLUMNS))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text, k=2, E_k=float("nan")):
        rows = [ln for ln in text.strip().splitlines()]
        header = rows[0].split(",")
        s = cls(k=k, E_k=E_k)
        for ln in rows[1:]:
            vals = [float(x) for x in ln.split(",")]
            s.records.append(dict(zip(header, vals)))
        return s
