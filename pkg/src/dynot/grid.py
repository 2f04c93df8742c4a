"""
Staggered space-time grid and matrix-free transport operators.

Densities live on cell midpoints, momenta on cell faces. For a grid with
spatial sizes ``(n_0, ..., n_{d-1})`` and ``p`` time steps the arrays are

* interior density ``f``:   shape ``(n_0, ..., n_{d-1}, p - 1)``, times k/p, k = 1..p-1
* centered field (``v``, dual ``b_f``, continuity residual):
                            shape ``(n_0, ..., n_{d-1}, p)``, times (k + 1/2)/p
* momentum component ``i``: like a centered field but with ``n_i - 1`` faces
                            along axis ``i`` (Neumann) or ``n_i`` faces (periodic)
* centered momentum ``u``:  shape ``(d, n_0, ..., n_{d-1}, p)``

Face ``j`` of a periodic axis sits at position ``j / n`` (the left face of
cell ``j``); face ``j`` of a Neumann axis sits at ``(j + 1) / n`` and the two
domain boundary faces carry zero flux.

Flattening any of these arrays with ``order="F"`` gives the vector layout
with axis 0 fastest and time slowest; the dense reference matrices in the
tests use that layout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MassMismatch, ShapeMismatch


class BC(str, enum.Enum):
    NEUMANN = "neumann"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class AxisSpec:
    size: int
    bc: BC = BC.NEUMANN

    def __post_init__(self):
        object.__setattr__(self, "bc", BC(self.bc))
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"axis size must be an integer >= 2, got {self.size}")

    @property
    def faces(self) -> int:
        return self.size - 1 if self.bc is BC.NEUMANN else self.size


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[AxisSpec, ...]
    time_steps: int

    def __post_init__(self):
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        if not 1 <= len(axes) <= 4:
            raise ValueError(f"need 1 to 4 spatial axes, got {len(axes)}")
        if int(self.time_steps) != self.time_steps or self.time_steps < 2:
            raise ValueError(f"time_steps must be an integer >= 2, got {self.time_steps}")

    @classmethod
    def create(cls, sizes: Sequence[int], time_steps: int, bcs=None) -> "GridSpec":
        if bcs is None:
            bcs = [BC.NEUMANN] * len(sizes)
        elif isinstance(bcs, (str, BC)):
            bcs = [bcs] * len(sizes)
        if len(bcs) != len(sizes):
            raise ValueError("one boundary condition per axis is required")
        return cls(tuple(AxisSpec(n, bc) for n, bc in zip(sizes, bcs)), time_steps)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def space_shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.axes)

    @property
    def cells(self) -> int:
        return int(np.prod(self.space_shape))

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return self.space_shape + (self.time_steps - 1,)

    @property
    def full_shape(self) -> tuple[int, ...]:
        return self.space_shape + (self.time_steps,)

    @property
    def centered_vector_shape(self) -> tuple[int, ...]:
        return (self.ndim,) + self.full_shape

    def momentum_shape(self, axis: int) -> tuple[int, ...]:
        shape = list(self.full_shape)
        shape[axis] = self.axes[axis].faces
        return tuple(shape)

    def momentum_shapes(self) -> list[tuple[int, ...]]:
        return [self.momentum_shape(i) for i in range(self.ndim)]

    def zeros_momentum(self) -> list[np.ndarray]:
        return [np.zeros(s) for s in self.momentum_shapes()]

    def zeros_interior(self) -> np.ndarray:
        return np.zeros(self.interior_shape)

    def zeros_full(self) -> np.ndarray:
        return np.zeros(self.full_shape)

    def zeros_centered_vector(self) -> np.ndarray:
        return np.zeros(self.centered_vector_shape)


@dataclass(frozen=True)
class BoundaryVectors:
    """Time-boundary contributions: ``plus`` enters the density average,
    ``minus`` is the right-hand side of the continuity constraint."""

    plus: np.ndarray
    minus: np.ndarray


def _check(arr, shape, name):
    if np.shape(arr) != tuple(shape):
        raise ShapeMismatch(f"{name}: expected shape {tuple(shape)}, got {np.shape(arr)}")


def _check_momentum(m, grid: GridSpec):
    if len(m) != grid.ndim:
        raise ShapeMismatch(f"momentum needs {grid.ndim} components, got {len(m)}")
    for i, comp in enumerate(m):
        _check(comp, grid.momentum_shape(i), f"momentum component {i}")


def _pad_axis(a: np.ndarray, axis: int) -> np.ndarray:
    shape = list(a.shape)
    shape[axis] += 2
    out = np.zeros(shape)
    _slice(out, axis, slice(1, -1))[...] = a
    return out


def _slice(a: np.ndarray, axis: int, sl: slice) -> np.ndarray:
    index = [slice(None)] * a.ndim
    index[axis] = sl
    return a[tuple(index)]


def build_boundary_vectors(f0, f1, grid: GridSpec, rtol: float = 1e-12) -> BoundaryVectors:
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    _check(f0, grid.space_shape, "f0")
    _check(f1, grid.space_shape, "f1")
    if (f0 < 0).any() or (f1 < 0).any():
        raise ValueError("boundary densities must be nonnegative")
    mass0, mass1 = f0.sum(), f1.sum()
    if abs(mass0 - mass1) > rtol * mass0:
        raise MassMismatch(f"boundary masses differ: {mass0!r} vs {mass1!r}")
    p = grid.time_steps
    plus = grid.zeros_full()
    minus = grid.zeros_full()
    plus[..., 0] = 0.5 * f0
    plus[..., -1] += 0.5 * f1
    minus[..., 0] = p * f0
    minus[..., -1] -= p * f1
    return BoundaryVectors(plus, minus)


def apply_S_M(m, grid: GridSpec) -> np.ndarray:
    """Average face momenta onto cell centers, one output component per axis."""
    _check_momentum(m, grid)
    out = grid.zeros_centered_vector()
    for i, (comp, ax) in enumerate(zip(m, grid.axes)):
        if ax.bc is BC.PERIODIC:
            out[i] = 0.5 * (comp + np.roll(comp, -1, axis=i))
        else:
            padded = _pad_axis(comp, i)
            out[i] = 0.5 * (_slice(padded, i, slice(None, -1)) + _slice(padded, i, slice(1, None)))
    return out


def apply_S_M_adjoint(w, grid: GridSpec) -> list[np.ndarray]:
    _check(w, grid.centered_vector_shape, "centered vector field")
    out = []
    for i, ax in enumerate(grid.axes):
        if ax.bc is BC.PERIODIC:
            out.append(0.5 * (w[i] + np.roll(w[i], 1, axis=i)))
        else:
            out.append(0.5 * (_slice(w[i], i, slice(None, -1)) + _slice(w[i], i, slice(1, None))))
    return out


def apply_S_F(f, grid: GridSpec) -> np.ndarray:
    """Temporal average of the interior density, without boundary terms."""
    _check(f, grid.interior_shape, "interior density")
    padded = _pad_axis(f, f.ndim - 1)
    return 0.5 * (padded[..., :-1] + padded[..., 1:])


def apply_S_F_plus_boundary(f, bv: BoundaryVectors, grid: GridSpec) -> np.ndarray:
    return apply_S_F(f, grid) + bv.plus


def apply_S_F_adjoint(w, grid: GridSpec) -> np.ndarray:
    _check(w, grid.full_shape, "centered field")
    return 0.5 * (w[..., :-1] + w[..., 1:])


def divergence(m, grid: GridSpec) -> np.ndarray:
    """Spatial part of the continuity operator, scaled by the cell counts."""
    _check_momentum(m, grid)
    out = grid.zeros_full()
    for i, (comp, ax) in enumerate(zip(m, grid.axes)):
        if ax.bc is BC.PERIODIC:
            out += ax.size * (np.roll(comp, -1, axis=i) - comp)
        else:
            out += ax.size * np.diff(_pad_axis(comp, i), axis=i)
    return out


def divergence_adjoint(w, grid: GridSpec) -> list[np.ndarray]:
    _check(w, grid.full_shape, "centered field")
    out = []
    for i, ax in enumerate(grid.axes):
        if ax.bc is BC.PERIODIC:
            out.append(ax.size * (np.roll(w, 1, axis=i) - w))
        else:
            out.append(-ax.size * np.diff(w, axis=i))
    return out


def time_difference(f, grid: GridSpec) -> np.ndarray:
    _check(f, grid.interior_shape, "interior density")
    return grid.time_steps * np.diff(_pad_axis(f, f.ndim - 1), axis=-1)


def time_difference_adjoint(w, grid: GridSpec) -> np.ndarray:
    _check(w, grid.full_shape, "centered field")
    return -grid.time_steps * np.diff(w, axis=-1)


def apply_A(m, f, grid: GridSpec) -> np.ndarray:
    """Discrete continuity operator ``div m + d_t f`` on all centered cells."""
    return divergence(m, grid) + time_difference(f, grid)


def apply_A_adjoint(w, grid: GridSpec) -> tuple[list[np.ndarray], np.ndarray]:
    return divergence_adjoint(w, grid), time_difference_adjoint(w, grid)


def momentum_dot(a, b) -> float:
    return float(sum(np.vdot(x, y) for x, y in zip(a, b)))


def momentum_norm(m) -> float:
    return float(np.sqrt(sum(np.vdot(c, c) for c in m)))
