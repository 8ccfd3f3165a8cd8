"""Finite-difference and Fourier differentiation on uniform grids.

The z-direction is a bounded interval closed by Dirichlet data; the transverse
directions are periodic and handled spectrally.
"""

import numpy as np
import scipy.sparse as sp

# 4th-order stencils. Rows 0/1 are the off-centred closures used next to a
# boundary; the mirror image is used at the other end (sign flip for d/dz).
_D1_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D1_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_D1_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_D2_EDGE0 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_D2_EDGE1 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0


def uniform_grid(L, n_nodes):
    if n_nodes < 7:
        raise ValueError("need at least 7 nodes for the 4th-order stencils")
    z = np.linspace(-L, L, n_nodes)
    return z, z[1] - z[0]


def d1_matrix(n, h, periodic=False):
    """Full n x n first-derivative matrix (4th order, one-sided at the ends)."""
    if periodic:
        return _circulant(_D1_CENTRAL, n) / h
    D = sp.lil_matrix((n, n))
    for i in range(2, n - 2):
        D[i, i - 2:i + 3] = _D1_CENTRAL
    D[0, 0:5] = _D1_EDGE0
    D[1, 0:5] = _D1_EDGE1
    D[n - 1, n - 5:n] = -_D1_EDGE0[::-1]
    D[n - 2, n - 5:n] = -_D1_EDGE1[::-1]
    return (D / h).tocsr()


def d2_matrix(n, h, periodic=False):
    """Full n x n second-derivative matrix (4th order, one-sided at the ends)."""
    if periodic:
        return _circulant(_D2_CENTRAL, n) / h**2
    D = sp.lil_matrix((n, n))
    for i in range(2, n - 2):
        D[i, i - 2:i + 3] = _D2_CENTRAL
    D[0, 0:6] = _D2_EDGE0
    D[1, 0:6] = _D2_EDGE1
    D[n - 1, n - 6:n] = _D2_EDGE0[::-1]
    D[n - 2, n - 6:n] = _D2_EDGE1[::-1]
    return (D / h**2).tocsr()


def d1_matrix_2nd(n, h):
    """2nd-order central first derivative (interior rows only; ends zero)."""
    main = np.zeros(n)
    off = np.full(n - 1, 0.5)
    D = sp.diags([-off, main, off], [-1, 0, 1], format="lil")
    D[0, :] = 0.0
    D[n - 1, :] = 0.0
    return (D / h).tocsr()


def d2_matrix_2nd(n, h):
    """2nd-order central second derivative (interior rows only; ends zero)."""
    D = sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    D[0, :] = 0.0
    D[n - 1, :] = 0.0
    return (D / h**2).tocsr()


def _circulant(stencil, n):
    half = len(stencil) // 2
    rows, cols, vals = [], [], []
    for i in range(n):
        for k, s in enumerate(stencil):
            if s != 0.0:
                rows.append(i)
                cols.append((i + k - half) % n)
                vals.append(s)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def dz(field, h, order=1, axis=0):
    """Apply the 4th-order z-derivative of the given order along ``axis``."""
    field = np.asarray(field)
    if order == 0:
        return field
    n = field.shape[axis]
    moved = np.moveaxis(field, axis, 0)
    flat = moved.reshape(n, -1)
    D1 = d1_matrix(n, h)
    D2 = d2_matrix(n, h)
    out = flat
    k = order
    while k >= 2:
        out = D2 @ out
        k -= 2
    if k == 1:
        out = D1 @ out
    return np.moveaxis(np.asarray(out).reshape(moved.shape), 0, axis)


def wavenumbers(n, spacing):
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def dy_spectral(field, spacing, order=1, axis=1):
    """Spectral derivative along a periodic axis."""
    field = np.asarray(field)
    if order == 0:
        return field
    n = field.shape[axis]
    xi = wavenumbers(n, spacing)
    mult = (1j * xi) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0  # Nyquist mode has no odd derivative
    shape = [1] * field.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(field, axis=axis) * mult.reshape(shape), axis=axis)
    return out.real if np.isrealobj(field) else out


def trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w
