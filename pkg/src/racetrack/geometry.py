"""Circle domain, uniform grid, periodic quadrature and the transport kernel."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import circulant_apply

TWO_PI = 2.0 * np.pi
DEFAULT_NODES = 256


def circular_distance(x, y):
    """Shorter arc length between angles on the unit circle.

    Works elementwise on arrays. Inputs are expected in [-pi, pi).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.isnan(x).any() or np.isnan(y).any():
        raise ValueError("circular_distance: NaN input")
    d = np.abs(x - y)
    d = np.minimum(d, TWO_PI - d)
    return d if d.ndim else float(d)


@dataclass(frozen=True)
class Grid:
    """Uniform grid x_i = -pi + i*dx, i = 0..I-1, on the circle."""

    I: int
    nodes: np.ndarray = field(repr=False)
    dx: float

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.I, self.dx)

    def __len__(self):
        return self.I


def build_grid(I: int = DEFAULT_NODES) -> Grid:
    if isinstance(I, bool) or int(I) != I:
        raise ValueError(f"node count must be an integer, got {I!r}")
    I = int(I)
    if I < 4 or I % 2:
        raise ValueError(f"node count must be even and >= 4, got {I}")
    dx = TWO_PI / I
    nodes = -np.pi + dx * np.arange(I, dtype=np.float64)
    nodes.setflags(write=False)
    return Grid(I=I, nodes=nodes, dx=dx)


@dataclass(frozen=True)
class Kernel:
    """Dense circulant matrix K[i, j] = exp(-alpha * d(x_i, x_j))."""

    matrix: np.ndarray = field(repr=False)
    alpha: float

    @property
    def first_row(self) -> np.ndarray:
        """Generating row c with K[i, j] = c[(j - i) % I]."""
        return self.matrix[0]

    def apply(self, values) -> np.ndarray:
        """K @ values, summed in a fixed offset order (shift-equivariant)."""
        v = np.ascontiguousarray(values, dtype=np.float64)
        out = np.empty_like(v)
        circulant_apply(np.ascontiguousarray(self.first_row), v,
                        np.empty(2 * v.shape[0]), out)
        return out

    def row_integral(self, grid: Grid) -> float:
        return integrate(grid, self.matrix[0])


def build_kernel(grid: Grid, alpha: float) -> Kernel:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    I = grid.I
    # Integer offsets make the matrix exactly symmetric and circulant; the
    # distance for offset k is min(k, I-k)*dx.
    k = np.arange(I)
    offset = np.minimum(k, I - k)
    first_row = np.exp(-alpha * grid.dx * offset)
    idx = (k[None, :] - k[:, None]) % I
    matrix = first_row[idx]
    matrix.setflags(write=False)
    return Kernel(matrix=matrix, alpha=alpha)


def integrate(grid: Grid, values) -> float:
    """Periodic trapezoid rule. On a uniform periodic grid every weight is dx."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (grid.I,):
        raise ValueError(
            f"field has shape {values.shape}, expected ({grid.I},)")
    return float(grid.dx * values.sum())


def rotate(values, k: int) -> np.ndarray:
    """Shift a grid field by k nodes (positive k moves mass to larger x)."""
    return np.roll(np.asarray(values), k)
