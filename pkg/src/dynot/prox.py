"""
Kinetic energy ``|u|^2 / (2 v)`` and its proximal map.

The prox is separable over cells. At each cell it reduces to the largest
real root of the cubic ``2 (1 + s v)^2 (v - a_f) - s |a_m|^2``; the root
finder is Newton started to the right of that root, where the cubic is
convex and increasing, so the iterates decrease monotonically onto it.
"""

from __future__ import annotations

import numpy as np

from .errors import NonConvergence, ShapeMismatch

NEWTON_MAX_ITER = 50
BISECTION_MAX_ITER = 200


def cost_J(u, v) -> float:
    """Sum of ``|u|^2 / (2 v)`` over cells.

    ``u`` has a leading component axis (length d) and the remaining shape of
    ``v``. Cells with ``(u, v) = (0, 0)`` cost nothing; cells with ``v < 0``
    or ``v = 0`` and ``u != 0`` make the energy infinite.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[1:] != v.shape:
        raise ShapeMismatch(f"u shape {u.shape} does not match v shape {v.shape}")
    usq = np.sum(u * u, axis=0)
    if (v < 0).any() or ((v == 0) & (usq > 0)).any():
        return np.inf
    pos = v > 0
    return float(np.sum(usq[pos] / (2.0 * v[pos])))


def benamou_brenier_energy(u, v, time_steps: int) -> float:
    """``cost_J`` rescaled by the space-time cell volume.

    For unit-mass densities on ``[0,1]^d`` this approximates the continuous
    kinetic energy, i.e. half the squared Wasserstein-2 distance.
    """
    return cost_J(u, v) / time_steps


def cubic(v, a_f, a_m_sq, sigma):
    return 2.0 * (1.0 + sigma * v) ** 2 * (v - a_f) - sigma * a_m_sq


def cubic_derivative(v, a_f, sigma):
    w = 1.0 + sigma * v
    return 2.0 * w * w + 4.0 * sigma * w * (v - a_f)


def cubic_tolerance(a_f, sigma):
    return 1e-10 * np.maximum(1.0, np.abs(a_f) ** 3 * sigma**2)


def _largest_root(a_f, a_m_sq, sigma):
    """Largest real root of the prox cubic, for cells where it is positive."""
    v = np.maximum(a_f, 0.0) + 0.5 * sigma * a_m_sq + 1.0
    todo = np.arange(v.size)
    for _ in range(NEWTON_MAX_ITER):
        vt, aft = v[todo], a_f[todo]
        step = cubic(vt, aft, a_m_sq[todo], sigma) / cubic_derivative(vt, aft, sigma)
        vt = vt - step
        v[todo] = vt
        todo = todo[np.abs(step) > 1e-14 * np.maximum(1.0, np.abs(vt))]
        if todo.size == 0:
            break

    bad = ~(np.abs(cubic(v, a_f, a_m_sq, sigma)) <= cubic_tolerance(a_f, sigma)) | ~(v > 0)
    if bad.any():
        v[bad] = _bisect(a_f[bad], a_m_sq[bad], sigma)
    return v


def _bisect(a_f, a_m_sq, sigma):
    # g(0) < 0 for these cells; double the right end until the sign changes
    lo = np.zeros_like(a_f)
    hi = np.maximum(a_f, 0.0) + 0.5 * sigma * a_m_sq + 1.0
    for _ in range(200):
        neg = cubic(hi, a_f, a_m_sq, sigma) < 0
        if not neg.any():
            break
        hi[neg] *= 2.0
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        neg = cubic(mid, a_f, a_m_sq, sigma) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if (hi - lo <= 2 * np.finfo(float).eps * hi).all():
            break
    return 0.5 * (lo + hi)


def prox_J(a_m, a_f, sigma: float):
    """Proximal map of the kinetic energy with weight ``sigma``.

    Minimizes ``|u|^2/(2v) + sigma/2 (|u - a_m|^2 + (v - a_f)^2)`` cell by
    cell. ``a_m`` has a leading component axis of length d (a scalar
    ``a_m`` is treated as d = 1) and the remaining shape of ``a_f``.

    Returns
    -------
    u, v : ndarray
        Minimizer, with ``u`` shaped like ``a_m``.

    Raises
    ------
    NonConvergence
        If the returned root misses the residual tolerance. ``index`` is the
        first offending cell.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    a_f = np.asarray(a_f, dtype=float)
    a_m = np.asarray(a_m, dtype=float)
    if a_m.shape == a_f.shape:
        a_m = a_m[np.newaxis]
        squeeze = True
    else:
        squeeze = False
    if a_m.shape[1:] != a_f.shape:
        raise ShapeMismatch(f"a_m shape {a_m.shape} does not match a_f shape {a_f.shape}")

    a_m_sq = np.sum(a_m * a_m, axis=0)
    # cubic(0) = -2 a_f - sigma |a_m|^2 < 0 exactly when the largest root is > 0;
    # non-finite cells go through the root finder so that they get reported
    active = ~(2.0 * a_f + sigma * a_m_sq <= 0)
    v = np.zeros_like(a_f)
    if active.any():
        af = a_f[active]
        amsq = a_m_sq[active]
        root = _largest_root(af, amsq, sigma)
        resid = np.abs(cubic(root, af, amsq, sigma))
        failed = ~(resid <= cubic_tolerance(af, sigma)) | ~(root > 0)
        if failed.any():
            first = np.flatnonzero(active)[np.flatnonzero(failed)[0]]
            index = np.unravel_index(first, a_f.shape)
            raise NonConvergence(f"prox cubic did not converge at cell {index}", index=index)
        v[active] = root
    u = sigma * v * a_m / (1.0 + sigma * v)
    if squeeze:
        u = u[0]
    return u, v


def prox_J_field(u_in, v_in, sigma: float):
    """Batch prox over a centered pair ``(u, v)``; ``u`` has shape ``(d, ...)``."""
    u_in = np.asarray(u_in, dtype=float)
    v_in = np.asarray(v_in, dtype=float)
    if u_in.ndim != v_in.ndim + 1 or u_in.shape[1:] != v_in.shape:
        raise ShapeMismatch(f"u shape {u_in.shape} does not match v shape {v_in.shape}")
    return prox_J(u_in, v_in, sigma)


def prox_objective(u, v, a_m, a_f, sigma):
    """Per-cell value of the prox objective; ``u`` and ``a_m`` are ``(d, ...)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    usq = np.sum(u * u, axis=0)
    dsq = np.sum((u - a_m) ** 2, axis=0)
    safe_v = np.where(v > 0, v, 1.0)
    energy = np.where(v > 0, usq / (2.0 * safe_v), np.where((v == 0) & (usq == 0), 0.0, np.inf))
    return energy + 0.5 * sigma * (dsq + (v - a_f) ** 2)
