"""Congestion functionals evaluated on simulation output.

Two scalar diagnostics summarise a run:

* ``functional_j`` — total variation of the density integrated over time,
  a measure of how much spatial oscillation the solution carries;
* ``functional_psi`` — a queue indicator: a piecewise-linear weight of the
  density (0 below ``lo``, 1 above ``hi``, linear in between) integrated
  over time and over a spatial observation window.

Both are computed from per-step accumulators that the solver records while
marching, so no dense space-time storage is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowError

__all__ = [
    "QueueWeight",
    "DEFAULT_QUEUE_WEIGHT",
    "DEFAULT_WINDOW",
    "functional_j",
    "functional_psi",
]


@dataclass(frozen=True)
class QueueWeight:
    """Ramp weight: 0 for ``rho <= lo``, 1 for ``rho >= hi``, linear between."""

    lo: float = 0.75
    hi: float = 0.85

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise WindowError(f"queue weight needs lo < hi, got [{self.lo}, {self.hi}]")

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.clip((rho - self.lo) / (self.hi - self.lo), 0.0, 1.0)


#: weight used by the built-in experiments: ramps from 0.75 to 0.85
DEFAULT_QUEUE_WEIGHT = QueueWeight()

#: spatial observation window used by the built-in experiments
DEFAULT_WINDOW = (-0.8, -1.0 / 3.0)


def functional_j(solution) -> float:
    """Time-integrated total variation, ``sum_n dt_n * TV(rho^n)``.

    The sum uses the left endpoint of every step, matching the first-order
    accuracy of the scheme.
    """
    return float(np.dot(solution.dt_history, solution.tv_history[:-1]))


def functional_psi(
    solution,
    a: float = DEFAULT_WINDOW[0],
    b: float = DEFAULT_WINDOW[1],
) -> float:
    """Queue mass in the window ``[a, b]``: ``∫∫_{[0,T]x[a,b]} q(rho) dx dt``.

    Cells are included when their center lies in ``[a, b]``; the time
    integral per cell was accumulated during the march with the solver's
    queue weight.  Raises :class:`WindowError` when the window is inverted or
    not contained in the domain.
    """
    if not a < b:
        raise WindowError(f"window must satisfy a < b, got [{a}, {b}]")
    grid = solution.grid
    if a < grid.x_min or b > grid.x_max:
        raise WindowError(
            f"window [{a}, {b}] exceeds the domain [{grid.x_min}, {grid.x_max}]"
        )
    mask = grid.window_mask(a, b)
    return float(grid.dx * solution.queue_time_integral[mask].sum())
