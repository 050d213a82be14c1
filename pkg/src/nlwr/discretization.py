"""Periodic 1-D grids, cell fields, discrete convolution, and discrete norms.

The grid is a uniform partition of ``[x_min, x_max]`` into cells with periodic
wraparound; a :class:`CellField` holds one cell-averaged value per cell.  The
discrete convolution implements

    R_j = dx * sum_k  rho_{j-k} * w_k,        w_k = w(k * dx),

with periodic index arithmetic, which is the nonlocal average feeding the
velocity law of the flux.  Kernel weight at offsets ``k > 0`` therefore draws
on cells behind (to the left of) cell ``j``, the convolution mirroring the
kernel across its argument.

All functions here are pure; :class:`ConvolutionOperator` instances carry a
scratch buffer and must not be shared between threads (each solve builds its
own).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import GridMismatchError, KernelSupportError, ParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .model import Kernel

__all__ = [
    "Grid1D",
    "CellField",
    "ConvolutionOperator",
    "convolve",
    "constant_field",
    "coarsen",
    "l1_norm",
    "linf_norm",
    "tv",
    "l1_distance",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic cell grid on ``[x_min, x_max]``.

    Cell centers sit at ``x_min + (j + 1/2) * dx`` for ``j = 0..n_cells-1``
    and interfaces at ``x_min + j * dx``.
    """

    x_min: float = -1.0
    x_max: float = 1.0
    n_cells: int = 400

    def __post_init__(self) -> None:
        if not self.x_max > self.x_min:
            raise ParameterError(f"empty domain: [{self.x_min}, {self.x_max}]")
        if self.n_cells < 1:
            raise ParameterError(f"n_cells must be positive, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def interfaces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    def window_mask(self, a: float, b: float) -> np.ndarray:
        """Boolean mask of cells whose center lies in ``[a, b]``."""
        c = self.centers()
        return (c >= a) & (c <= b)


@dataclass(eq=False)
class CellField:
    """Cell-averaged real values on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise GridMismatchError(
                f"field has {self.values.shape} values for a grid of "
                f"{self.grid.n_cells} cells"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")


def constant_field(grid: Grid1D, value: float) -> CellField:
    return CellField(grid, np.full(grid.n_cells, float(value)))


class ConvolutionOperator:
    """Precomputed periodic discrete convolution with a sampled kernel.

    Applies the circular convolution ``R_j = dx * sum_k values[(j-k) % n] * w_k``
    as a direct gathered sum (one ``(n, K)`` take plus a matrix-vector
    product).  This is the discrete counterpart of ``(w * rho)(x_j)``: a
    kernel whose weight sits at positive offsets (``delta > 0``) averages the
    density a distance ``delta`` upstream of ``x_j``.  The kernel support may
    not exceed the domain length, otherwise the periodic sum would wrap onto
    itself.
    """

    def __init__(self, grid: Grid1D, kernel: "Kernel") -> None:
        if abs(kernel.dx - grid.dx) > 1e-12 * grid.dx:
            raise GridMismatchError(
                f"kernel sampled at dx={kernel.dx} does not match grid dx={grid.dx}"
            )
        if 2.0 * kernel.eta > grid.length * (1.0 + 1e-12):
            raise KernelSupportError(
                f"kernel support width {2 * kernel.eta} exceeds the domain "
                f"length {grid.length}"
            )
        n = grid.n_cells
        j = np.arange(n)[:, None]
        self.grid = grid
        self.kernel = kernel
        self._idx = (j - kernel.offsets[None, :]) % n
        self._weights = kernel.weights * grid.dx
        self._buf = np.empty(self._idx.shape, dtype=float)

    def apply_values(self, values: np.ndarray) -> np.ndarray:
        np.take(values, self._idx, out=self._buf)
        return self._buf @ self._weights

    def apply(self, f: CellField) -> CellField:
        if f.grid != self.grid:
            raise GridMismatchError("field grid does not match operator grid")
        return CellField(f.grid, self.apply_values(f.values))


def convolve(rho: CellField, kernel: "Kernel") -> CellField:
    """One-shot periodic convolution ``R_j = dx * sum_k rho_{j-k} w_k``."""
    return ConvolutionOperator(rho.grid, kernel).apply(rho)


def coarsen(f: CellField, coarse: Grid1D) -> CellField:
    """Project a field onto a coarser grid by averaging child cells.

    The fine grid must cover the same domain with a cell count that is an
    integer multiple of the coarse one (cell averages are preserved exactly).
    """
    fine = f.grid
    if (fine.x_min, fine.x_max) != (coarse.x_min, coarse.x_max):
        raise GridMismatchError("grids cover different domains")
    if fine.n_cells % coarse.n_cells != 0:
        raise GridMismatchError(
            f"cannot coarsen {fine.n_cells} cells onto {coarse.n_cells}"
        )
    factor = fine.n_cells // coarse.n_cells
    values = f.values.reshape(coarse.n_cells, factor).mean(axis=1)
    return CellField(coarse, values)


def l1_norm(f: CellField) -> float:
    """Discrete L1 norm ``dx * sum |f_j|``."""
    return float(f.grid.dx * np.abs(f.values).sum())


def linf_norm(f: CellField) -> float:
    """Discrete L-infinity norm ``max |f_j|``."""
    return float(np.abs(f.values).max())


def tv(f: CellField) -> float:
    """Periodic total variation ``sum_j |f_{j+1} - f_j|``, wrap jump included."""
    v = f.values
    return float(np.abs(np.diff(v, append=v[0])).sum())


def l1_distance(f: CellField, g: CellField) -> float:
    """Discrete L1 distance between two fields on the same grid."""
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")
    return float(f.grid.dx * np.abs(f.values - g.values).sum())
