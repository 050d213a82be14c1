"""Lax–Friedrichs finite-volume solver with CFL-adaptive time stepping.

The scheme advances the cell averages of the nonlocal conservation law

    d_t rho + d_x ( f(t, x, rho) * v((w * rho)(x)) ) = 0

on a periodic grid.  One step reads

    F_{j+1/2} = 1/2 (f(t, x_j, rho_j) v(R_j) + f(t, x_{j+1}, rho_{j+1}) v(R_{j+1}))
                - alpha/2 (rho_{j+1} - rho_j)
    rho_j    <- rho_j - dt/dx (F_{j+1/2} - F_{j-1/2})

where ``R_j = dx * sum_k rho_{j-k} w(k dx)`` is the discrete convolution.
The artificial viscosity ``alpha`` must dominate ``sup|d_rho f| * sup v``;
together with the CFL restriction

    dt/dx * (alpha + (C dx + 2 sup|d_rho f|) sup v) < 1

the update preserves non-negativity and conserves mass exactly (telescoping
sum on the periodic domain).

Time steps adapt to the CFL limit and are clipped so the march lands exactly
on the speed-limit switching times and on the horizon ``T``.  Total
variation and the queue weight are accumulated online at every accepted
step, so the congestion functionals do not depend on the snapshot stride.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discretization import CellField, ConvolutionOperator, Grid1D, tv
from .errors import (
    CFLViolationError,
    DensityBoundsError,
    GridMismatchError,
    NonFiniteStateError,
    ParameterError,
)
from .functionals import DEFAULT_QUEUE_WEIGHT, QueueWeight
from .model import (
    FluxModel,
    Kernel,
    NormBundle,
    VelocityLaw,
    problem_norms,
    velocity_eval,
)

__all__ = [
    "SolverConfig",
    "Problem",
    "Solution",
    "resolve_alpha",
    "cfl_dt",
    "step",
    "solve",
    "write_snapshots",
]

#: relative tolerance for dt comparisons against the CFL limit
_DT_SLACK = 1e-12
#: runtime guard: densities must stay inside [-1e-12, 1 + 1e-10]
_RHO_LO = -1e-12
_RHO_HI = 1.0 + 1e-10


@dataclass(frozen=True)
class SolverConfig:
    """March parameters.

    ``alpha_policy`` is either the string ``"auto"`` (use the smallest
    admissible viscosity ``sup|d_rho f| * sup v``, minimising numerical
    diffusion) or an explicit non-negative viscosity value, which must not
    fall below that floor.  ``clip_times`` lists extra times the march must
    land on exactly (the speed-limit switches and ``T`` are always included).
    """

    T: float = 0.5
    cfl_safety: float = 0.9
    alpha_policy: float | str = "auto"
    snapshot_stride: int = 50
    clip_times: tuple[float, ...] = ()
    queue_weight: QueueWeight = DEFAULT_QUEUE_WEIGHT

    def __post_init__(self) -> None:
        if not 0.0 < self.cfl_safety < 1.0:
            raise ParameterError(
                f"cfl_safety must lie in ]0, 1[, got {self.cfl_safety}"
            )
        if not self.T > 0.0:
            raise ParameterError(f"horizon T must be positive, got {self.T}")
        if not (isinstance(self.snapshot_stride, int) and self.snapshot_stride >= 1):
            raise ParameterError(
                f"snapshot_stride must be a positive integer, got {self.snapshot_stride}"
            )
        if isinstance(self.alpha_policy, str):
            if self.alpha_policy != "auto":
                raise ParameterError(
                    f"alpha_policy must be 'auto' or a number, got {self.alpha_policy!r}"
                )
        elif not self.alpha_policy >= 0.0:
            raise ParameterError(
                f"explicit alpha must be non-negative, got {self.alpha_policy}"
            )


@dataclass(frozen=True, eq=False)
class Problem:
    """One fully specified initial-value problem on a periodic grid."""

    grid: Grid1D
    kernel: Kernel
    velocity: VelocityLaw
    flux: FluxModel
    rho0: CellField
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        if self.rho0.grid != self.grid:
            raise GridMismatchError("initial datum lives on a different grid")
        if self.flux.grid != self.grid:
            raise GridMismatchError("speed-limit field lives on a different grid")
        if abs(self.kernel.dx - self.grid.dx) > 1e-12 * self.grid.dx:
            raise GridMismatchError(
                f"kernel sampled at dx={self.kernel.dx}, grid has dx={self.grid.dx}"
            )
        lo = float(self.rho0.values.min())
        hi = float(self.rho0.values.max())
        if lo < 0.0 or hi > 1.0:
            raise DensityBoundsError(
                f"initial density must lie in [0, 1], got range [{lo}, {hi}]"
            )

    def norms(self, t: float | None = None, rho_max: float = 1.0) -> NormBundle:
        """Norm bundle of this problem's model functions at horizon ``t``."""
        horizon = self.config.T if t is None else t
        return problem_norms(
            self.kernel, self.velocity, self.flux, horizon, rho_max=rho_max
        )


@dataclass(eq=False)
class Solution:
    """March output: strided snapshots plus per-step online accumulators.

    ``times``/``snapshots`` hold the stored states (always including the
    initial and final time).  ``step_times`` has one entry per accepted time
    point and ``tv_history[i]`` is the periodic total variation at
    ``step_times[i]``; ``dt_history[i] = step_times[i+1] - step_times[i]``.
    ``queue_time_integral[j]`` is ``sum_n dt_n * q(rho^n_j)`` (left-endpoint
    rule), ready for the queue functional.
    """

    grid: Grid1D
    times: np.ndarray
    snapshots: np.ndarray
    dt_history: np.ndarray
    step_times: np.ndarray
    tv_history: np.ndarray
    queue_time_integral: np.ndarray
    mass_drift: float
    min_density: float
    alpha: float
    dt_cfl: float

    def __post_init__(self) -> None:
        if self.times.size < 1 or np.any(np.diff(self.times) <= 0.0):
            raise ParameterError("snapshot times must be strictly increasing")
        if not np.isfinite(self.snapshots).all():
            raise NonFiniteStateError("stored snapshots contain non-finite values")

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return int(self.dt_history.size)

    def state_at(self, i: int) -> CellField:
        return CellField(self.grid, self.snapshots[i])

    def state_at_time(self, t: float, tol: float = 1e-12) -> CellField:
        """Stored snapshot at time ``t`` (must match a stored stamp)."""
        idx = np.flatnonzero(np.abs(self.times - t) <= tol)
        if idx.size == 0:
            raise ParameterError(
                f"no snapshot stored at t={t}; stored times run "
                f"{self.times[0]}..{self.times[-1]} (use clip_times to force one)"
            )
        return self.state_at(int(idx[0]))

    @property
    def final_state(self) -> CellField:
        return self.state_at(-1)

    @classmethod
    def from_state_sequence(
        cls,
        grid: Grid1D,
        times,
        states,
        queue_weight: QueueWeight = DEFAULT_QUEUE_WEIGHT,
    ) -> "Solution":
        """Package an explicit sequence of states as a Solution.

        Accumulators (total variation, queue integral) are recomputed from
        the given states with the same left-endpoint rule the solver uses;
        handy for evaluating functionals on synthetic trajectories.
        """
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if states.ndim != 2 or states.shape != (times.size, grid.n_cells):
            raise GridMismatchError(
                f"need one state of {grid.n_cells} cells per time, got {states.shape}"
            )
        dt_history = np.diff(times)
        tv_history = np.array([tv(CellField(grid, s)) for s in states])
        queue = np.zeros(grid.n_cells)
        for dt, state in zip(dt_history, states[:-1]):
            queue += dt * queue_weight(state)
        masses = grid.dx * states.sum(axis=1)
        return cls(
            grid=grid,
            times=times,
            snapshots=states,
            dt_history=dt_history,
            step_times=times,
            tv_history=tv_history,
            queue_time_integral=queue,
            mass_drift=float(np.abs(masses - masses[0]).max()),
            min_density=float(states.min()),
            alpha=math.nan,
            dt_cfl=math.nan,
        )


def resolve_alpha(p: Problem, norms: NormBundle) -> float:
    """Viscosity according to the problem's policy.

    ``"auto"`` returns the floor ``sup|d_rho f| * sup v`` exactly; an
    explicit value is validated against that floor.
    """
    floor = norms.df_drho_sup * norms.v_sup
    policy = p.config.alpha_policy
    if isinstance(policy, str):
        return floor
    if policy < floor * (1.0 - 1e-12):
        raise ParameterError(
            f"alpha={policy} is below the admissible floor "
            f"sup|d_rho f|*sup v = {floor}"
        )
    return float(policy)


def cfl_dt(p: Problem, norms: NormBundle, alpha: float) -> float:
    """Largest stable time step, ``cfl_safety * dx / (alpha + (C dx + 2 sup|d_rho f|) sup v)``.

    Returns ``math.inf`` when the denominator vanishes (static flux — any
    step is stable).
    """
    denom = alpha + (norms.C * p.grid.dx + 2.0 * norms.df_drho_sup) * norms.v_sup
    if denom == 0.0:
        return math.inf
    return p.config.cfl_safety * p.grid.dx / denom


def _flux_times_velocity(
    p: Problem, t_field: float, values: np.ndarray, conv: ConvolutionOperator
) -> np.ndarray:
    """Per-cell product ``f(t, x_j, rho_j) * v(R_j)``."""
    R = conv.apply_values(values)
    return (
        p.flux.speed_limit.values_at(t_field)
        * values
        * (1.0 - values)
        * velocity_eval(p.velocity, R)
    )


def _one_step(
    p: Problem,
    values: np.ndarray,
    t: float,
    dt: float,
    alpha: float,
    conv: ConvolutionOperator,
) -> np.ndarray:
    """Conservative update; the speed limit is sampled at the step midpoint.

    With steps clipped to the switching times, the midpoint always falls in
    the interior of a single speed-limit phase, so the sampled profile is
    unambiguous even when ``t`` itself sits exactly on a switch.
    """
    g = _flux_times_velocity(p, t + 0.5 * dt, values, conv)
    F = 0.5 * (g + np.roll(g, -1)) - 0.5 * alpha * (np.roll(values, -1) - values)
    return values - (dt / p.grid.dx) * (F - np.roll(F, 1))


def step(
    rho: CellField,
    t: float,
    dt: float,
    p: Problem,
    alpha: float,
    norms: NormBundle | None = None,
) -> CellField:
    """One Lax–Friedrichs step of size ``dt`` starting from ``rho`` at ``t``.

    Validates ``dt`` against the CFL limit for the given viscosity and
    raises :class:`CFLViolationError` when it exceeds it.
    """
    if rho.grid != p.grid:
        raise GridMismatchError("state lives on a different grid than the problem")
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if norms is None:
        norms = p.norms(t + dt)
    limit = cfl_dt(p, norms, alpha)
    if dt > limit * (1.0 + _DT_SLACK):
        raise CFLViolationError(
            f"dt={dt} exceeds the stable limit {limit} (alpha={alpha})"
        )
    conv = ConvolutionOperator(p.grid, p.kernel)
    return CellField(p.grid, _one_step(p, rho.values, t, dt, alpha, conv))


def _landing_times(p: Problem, t0: float, T: float) -> np.ndarray:
    """Times the march must hit exactly: speed-limit switches, extras, T."""
    candidates = set(p.flux.speed_limit.time_breaks) | set(p.config.clip_times)
    inner = sorted(c for c in candidates if t0 < c < T)
    return np.array(inner + [T])


def _check_state(values: np.ndarray, t: float) -> None:
    if not np.isfinite(values).all():
        raise NonFiniteStateError(f"non-finite density at t={t}")
    lo = values.min()
    hi = values.max()
    if lo < _RHO_LO or hi > _RHO_HI:
        raise DensityBoundsError(
            f"density left [0, 1] at t={t}: range [{lo}, {hi}]"
        )


def solve(p: Problem, rho_init: CellField | None = None, t0: float = 0.0) -> Solution:
    """March from ``t0`` to ``config.T``; returns snapshots and accumulators.

    ``rho_init`` (default ``p.rho0``) allows restarting from a stored state.
    The step is ``min(CFL limit, time to next landing point)`` where the
    landing points are the speed-limit switching times, any configured clip
    times, and ``T`` itself — the march lands on each exactly.  Snapshots
    are stored every ``snapshot_stride`` accepted steps and additionally at
    ``t0``, every landing point, and ``T``.
    """
    T = p.config.T
    if not t0 < T:
        raise ParameterError(f"t0={t0} must precede the horizon T={T}")
    state0 = p.rho0 if rho_init is None else rho_init
    if state0.grid != p.grid:
        raise GridMismatchError("initial state lives on a different grid")

    norms = p.norms(T)
    alpha = resolve_alpha(p, norms)
    dt_max = cfl_dt(p, norms, alpha)
    conv = ConvolutionOperator(p.grid, p.kernel)
    qw = p.config.queue_weight
    stride = p.config.snapshot_stride

    values = state0.values.copy()
    _check_state(values, t0)
    mass0 = p.grid.dx * values.sum()

    snap_times = [t0]
    snaps = [values.copy()]
    step_times = [t0]
    tv_history = [tv(CellField(p.grid, values))]
    dt_history: list[float] = []
    queue = np.zeros(p.grid.n_cells)
    mass_drift = 0.0
    min_density = float(values.min())

    n_steps = 0
    t = t0
    landings = _landing_times(p, t0, T)
    landing_set = set(landings.tolist())
    for target in landings:
        seg_start = t
        # full-size steps, then one remainder step landing exactly on target
        if math.isfinite(dt_max):
            n_full = int((target - seg_start) / dt_max)
            while n_full > 0 and seg_start + n_full * dt_max >= target - _DT_SLACK * dt_max:
                n_full -= 1
        else:
            n_full = 0
        seg_stops = [seg_start + i * dt_max for i in range(1, n_full + 1)]
        seg_stops.append(target)
        for next_t in seg_stops:
            dt = next_t - t
            queue += dt * qw(values)
            values = _one_step(p, values, t, dt, alpha, conv)
            _check_state(values, next_t)
            n_steps += 1
            t = next_t
            dt_history.append(dt)
            step_times.append(t)
            tv_history.append(tv(CellField(p.grid, values)))
            mass_drift = max(mass_drift, abs(p.grid.dx * values.sum() - mass0))
            min_density = min(min_density, float(values.min()))
            if t == T or t in landing_set or n_steps % stride == 0:
                snap_times.append(t)
                snaps.append(values.copy())

    if snap_times[-1] != T:  # pragma: no cover - defensive; loop always lands on T
        snap_times.append(T)
        snaps.append(values.copy())

    return Solution(
        grid=p.grid,
        times=np.array(snap_times),
        snapshots=np.array(snaps),
        dt_history=np.array(dt_history),
        step_times=np.array(step_times),
        tv_history=np.array(tv_history),
        queue_time_integral=queue,
        mass_drift=float(mass_drift),
        min_density=min_density,
        alpha=alpha,
        dt_cfl=dt_max,
    )


def write_snapshots(solution: Solution, path) -> None:
    """Write stored snapshots as CSV rows ``t,x,rho`` (17 significant digits)."""
    centers = solution.grid.centers()
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("t,x,rho\n")
        for t, snap in zip(solution.times, solution.snapshots):
            for x, r in zip(centers, snap):
                handle.write(f"{t:.17g},{x:.17g},{r:.17g}\n")
