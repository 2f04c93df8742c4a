"""
Fast trigonometric transforms and the spectral pseudo-inverse of ``A A^T``.

``A A^T`` is the space-time Laplacian with Neumann conditions in time, and
Neumann or periodic conditions per spatial axis. It is diagonalized by the
orthonormal DCT-II along time and Neumann axes and by the DFT along
periodic axes, so its pseudo-inverse costs a handful of FFTs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .grid import BC, GridSpec, _check

ZERO_EIGENVALUE_RTOL = 1e-12


def cosine2_axis(t, axis=-1):
    """Orthonormal DCT-II along ``axis``.

    The first basis row carries the extra ``1/sqrt(2)`` factor, so the
    transform matrix is orthogonal.
    """
    return scipy.fft.dct(np.asarray(t, dtype=float), type=2, axis=axis, norm="ortho")


def cosine3_axis(t, axis=-1):
    """Inverse of :func:`cosine2_axis` (orthonormal DCT-III)."""
    return scipy.fft.idct(np.asarray(t, dtype=float), type=2, axis=axis, norm="ortho")


def fourier_axis(t, axis=-1):
    """Unnormalized DFT, ``X_j = sum_k x_k exp(-2 pi i j k / n)``."""
    return scipy.fft.fft(t, axis=axis)


def inverse_fourier_axis(t, axis=-1):
    """Inverse DFT carrying the ``1/n`` factor."""
    return scipy.fft.ifft(t, axis=axis)


def time_symbol(p: int) -> np.ndarray:
    k = np.arange(p)
    return 4.0 * np.sin(k * np.pi / (2 * p)) ** 2


def neumann_symbol(n: int) -> np.ndarray:
    j = np.arange(n)
    return 4.0 * np.sin(j * np.pi / (2 * n)) ** 2


def periodic_symbol(n: int) -> np.ndarray:
    j = np.arange(n)
    return 4.0 * np.sin(j * np.pi / n) ** 2


@dataclass(frozen=True)
class SpectralPlan:
    grid: GridSpec
    eigenvalues: np.ndarray = field(repr=False)
    inv_eigenvalues: np.ndarray = field(repr=False)
    cosine_axes: tuple[int, ...]
    fourier_axes: tuple[int, ...]


def build_poisson_plan(grid: GridSpec) -> SpectralPlan:
    ndim = grid.ndim + 1
    p = grid.time_steps
    lam = np.zeros(grid.full_shape)
    cosine_axes = []
    fourier_axes = []
    for i, ax in enumerate(grid.axes):
        shape = [1] * ndim
        shape[i] = ax.size
        if ax.bc is BC.PERIODIC:
            q = periodic_symbol(ax.size)
            fourier_axes.append(i)
        else:
            q = neumann_symbol(ax.size)
            cosine_axes.append(i)
        lam = lam + ax.size**2 * q.reshape(shape)
    cosine_axes.append(grid.ndim)
    lam = lam + p**2 * time_symbol(p).reshape([1] * grid.ndim + [p])

    inv = np.zeros_like(lam)
    nonzero = lam > ZERO_EIGENVALUE_RTOL * lam.max()
    inv[nonzero] = 1.0 / lam[nonzero]
    lam.flags.writeable = False
    inv.flags.writeable = False
    return SpectralPlan(grid, lam, inv, tuple(cosine_axes), tuple(fourier_axes))


def apply_AAt_pinv(plan: SpectralPlan, w) -> np.ndarray:
    """Apply ``(A A^T)^+``: the constant mode is annihilated."""
    _check(w, plan.grid.full_shape, "centered field")
    x = scipy.fft.dctn(np.asarray(w, dtype=float), type=2, axes=plan.cosine_axes, norm="ortho")
    if plan.fourier_axes:
        xh = scipy.fft.fftn(x, axes=plan.fourier_axes)
        xh *= plan.inv_eigenvalues
        x = scipy.fft.ifftn(xh, axes=plan.fourier_axes).real
    else:
        x = x * plan.inv_eigenvalues
    return scipy.fft.idctn(x, type=2, axes=plan.cosine_axes, norm="ortho")


def apply_AAt(plan: SpectralPlan, w) -> np.ndarray:
    """Apply ``A A^T`` through its eigen-decomposition (test helper)."""
    _check(w, plan.grid.full_shape, "centered field")
    x = scipy.fft.dctn(np.asarray(w, dtype=float), type=2, axes=plan.cosine_axes, norm="ortho")
    if plan.fourier_axes:
        xh = scipy.fft.fftn(x, axes=plan.fourier_axes)
        xh *= plan.eigenvalues
        x = scipy.fft.ifftn(xh, axes=plan.fourier_axes).real
    else:
        x = x * plan.eigenvalues
    return scipy.fft.idctn(x, type=2, axes=plan.cosine_axes, norm="ortho")
