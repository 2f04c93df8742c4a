"""
Color applications: RGB images as 3D densities and cyclic hue transport.

An RGB image is an array of shape ``(height, width, 3)`` with values in
``[0, 1]``. It is transported as a density on a ``height x width x 3`` grid
whose color axis is periodic by default, so red, green and blue are all
mutual neighbours and the result does not depend on the channel order.

Hue transport moves the normalized hue histogram along the circle and maps
each intermediate histogram back to pixels by exact histogram
specification, keeping saturation and value of the first image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyHue, ZeroMass
from .grid import BC
from .solver import SolveResult, SolverParams, TransportProblem, pdhg_solve


@dataclass(frozen=True)
class HsvImage:
    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return self.h.shape


def normalize_masses(f0, f1):
    """Rescale both densities to unit mass.

    Returns ``(f0 * scale0, f1 * scale1, scale0, scale1)``.
    """
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    m0, m1 = f0.sum(), f1.sum()
    if not (m0 > 0 and m1 > 0):
        raise ZeroMass(f"both inputs need positive mass, got {m0!r} and {m1!r}")
    s0, s1 = 1.0 / m0, 1.0 / m1
    return f0 * s0, f1 * s1, s0, s1


def display_scale(t, scale0, scale1):
    return (1.0 - t) * scale0 + t * scale1


def _check_rgb(img, name):
    img = np.asarray(img, dtype=float)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionMismatch(f"{name} must have shape (height, width, 3), got {img.shape}")
    return img


def solve_rgb(img0, img1, time_steps, params=SolverParams(), bc_color=BC.PERIODIC):
    """Solve the normalized RGB transport problem.

    Returns the solver result (unit-mass frames) and the two mass scales.
    """
    img0 = _check_rgb(img0, "img0")
    img1 = _check_rgb(img1, "img1")
    if img0.shape != img1.shape:
        raise DimensionMismatch(f"image sizes differ: {img0.shape} vs {img1.shape}")
    f0, f1, s0, s1 = normalize_masses(img0, img1)
    problem = TransportProblem.create(f0, f1, time_steps, [BC.NEUMANN, BC.NEUMANN, BC(bc_color)])
    return pdhg_solve(problem, params), s0, s1


def rgb_transport(img0, img1, time_steps, params=SolverParams(), bc_color=BC.PERIODIC):
    """Displacement interpolation between two RGB images.

    Returns ``time_steps + 1`` frames at ``t = k / time_steps``; the first
    and last frames are the inputs.
    """
    result, s0, s1 = solve_rgb(img0, img1, time_steps, params, bc_color)
    frames = result.frames()
    out = []
    for k in range(time_steps + 1):
        if k == 0:
            out.append(np.asarray(img0, dtype=float).copy())
        elif k == time_steps:
            out.append(np.asarray(img1, dtype=float).copy())
        else:
            t = k / time_steps
            out.append(np.clip(frames[..., k] / display_scale(t, s0, s1), 0.0, 1.0))
    return out


def rgb_to_hsv(img) -> HsvImage:
    """Hexcone RGB to HSV. Hue is in ``[0, 1)`` and set to 0 where ``s = 0``."""
    img = _check_rgb(img, "image")
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    v = img.max(axis=-1)
    c = v - img.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe_c = np.where(c > 0, c, 1.0)
    h = np.where(
        v == r,
        ((g - b) / safe_c) % 6.0,
        np.where(v == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
    )
    h = np.where(c > 0, h / 6.0, 0.0)
    h = np.where(h >= 1.0, h - 1.0, h)
    return HsvImage(h, s, v)


def hsv_to_rgb(img: HsvImage) -> np.ndarray:
    h6 = (np.asarray(img.h, dtype=float) % 1.0) * 6.0
    s = np.asarray(img.s, dtype=float)
    v = np.asarray(img.v, dtype=float)
    sector = np.floor(h6).astype(int) % 6
    frac = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * frac)
    t = v * (1.0 - s * (1.0 - frac))
    choices = [
        (v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q),
    ]
    out = np.empty(h6.shape + (3,))
    for ch in range(3):
        out[..., ch] = np.choose(sector, [c[ch] for c in choices])
    return out


def hue_histogram(img: HsvImage, bins: int) -> np.ndarray:
    """Normalized histogram of the defined hues (pixels with ``s > 0``)."""
    if bins < 2:
        raise ValueError("need at least 2 bins")
    hues = np.asarray(img.h)[np.asarray(img.s) > 0]
    if hues.size == 0:
        raise EmptyHue("no pixel has a defined hue")
    counts = np.bincount(hue_bins(hues, bins), minlength=bins).astype(float)
    return counts / counts.sum()


def hue_bins(values, bins: int) -> np.ndarray:
    idx = np.floor(np.asarray(values, dtype=float) % 1.0 * bins).astype(int)
    return np.minimum(idx, bins - 1)


def cyclic_hist_transport(h0, h1, time_steps, params=SolverParams()) -> list:
    """Transport between two histograms on the circle.

    Returns ``time_steps + 1`` histograms, each renormalized to sum 1.
    """
    h0 = np.asarray(h0, dtype=float)
    h1 = np.asarray(h1, dtype=float)
    if h0.shape != h1.shape or h0.ndim != 1:
        raise DimensionMismatch(f"histograms must be 1D of equal length, got {h0.shape}, {h1.shape}")
    h0, h1, _, _ = normalize_masses(h0, h1)
    problem = TransportProblem.create(h0, h1, time_steps, BC.PERIODIC)
    return _histogram_frames(pdhg_solve(problem, params))


def _histogram_frames(result: SolveResult) -> list:
    frames = result.frames()
    return [frames[:, k] / frames[:, k].sum() for k in range(frames.shape[1])]


def target_counts(target, total: int) -> np.ndarray:
    """Integer counts summing to ``total`` closest to ``total * target``.

    Largest-remainder rounding: each count is within one of
    ``round(total * target_b)``.
    """
    target = np.clip(np.asarray(target, dtype=float), 0.0, None)
    ideal = total * target / target.sum()
    counts = np.floor(ideal).astype(int)
    short = total - counts.sum()
    if short > 0:
        order = np.argsort(-(ideal - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def choose_cut(current, target) -> int:
    """Bin where the circle is opened: least combined current + target mass."""
    current = np.asarray(current, dtype=float)
    target = np.asarray(target, dtype=float)
    return int(np.argmin(current / current.sum() + target / target.sum()))


def exact_histogram_specification(values, target, cut=None) -> np.ndarray:
    """Move cyclic values in ``[0, 1)`` so their histogram equals ``target``.

    The circle is opened at bin ``cut`` (chosen by :func:`choose_cut` when
    omitted). Values are ranked by their position after the cut, ties by
    their index, and handed out to the target bins in order; each value
    becomes the center of the bin it is assigned to.
    """
    values = np.asarray(values, dtype=float)
    target = np.asarray(target, dtype=float)
    bins = target.size
    if values.size == 0:
        raise ValueError("no values to specify")
    if cut is None:
        current = np.bincount(hue_bins(values, bins), minlength=bins)
        cut = choose_cut(current, target)
    counts = target_counts(target, values.size)

    rank_bin = (hue_bins(values, bins) - cut) % bins
    order = np.lexsort((values % 1.0, rank_bin))
    assigned = np.repeat((np.arange(bins) + cut) % bins, np.roll(counts, -cut))
    out = np.empty_like(values)
    out[order] = (assigned + 0.5) / bins
    return out


def hue_transfer_hsv(img0, img1, bins=256, time_steps=8, params=SolverParams()):
    """HSV frames and transported histograms of the hue transfer.

    ``s`` and ``v`` of every frame are img0's own arrays.
    """
    img0 = _check_rgb(img0, "img0")
    img1 = _check_rgb(img1, "img1")
    hsv0 = rgb_to_hsv(img0)
    hsv1 = rgb_to_hsv(img1)
    hists = cyclic_hist_transport(hue_histogram(hsv0, bins), hue_histogram(hsv1, bins), time_steps, params)
    defined = hsv0.s > 0
    frames = []
    for ht in hists:
        h = hsv0.h.copy()
        h[defined] = exact_histogram_specification(hsv0.h[defined], ht)
        frames.append(HsvImage(h, hsv0.s, hsv0.v))
    return frames, hists


def hue_transfer_pipeline(img0, img1, bins=256, time_steps=8, params=SolverParams()) -> list:
    """RGB frames whose hue histograms follow the cyclic transport path."""
    frames, _ = hue_transfer_hsv(img0, img1, bins, time_steps, params)
    return [hsv_to_rgb(fr) for fr in frames]
