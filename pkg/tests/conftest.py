"""Shared fixtures: problem factories and one cached baseline solve."""

from __future__ import annotations

import numpy as np
import pytest

from nlwr import (
    CellField,
    FluxModel,
    Grid1D,
    Problem,
    RunConfig,
    SolverConfig,
    VelocityLaw,
    build_kernel,
    build_problem,
    constant_speed_limit,
    solve,
)


def grid_for(dx: float, x_min: float = -1.0, x_max: float = 1.0) -> Grid1D:
    return Grid1D(x_min, x_max, round((x_max - x_min) / dx))


def tame_problem(
    dx: float = 0.01,
    eta: float = 0.3,
    delta: float = 0.0,
    m: int = 1,
    v0: float = 1.0,
    rho0=0.6,
    T: float = 0.3,
    **config,
) -> Problem:
    """Problem with a constant speed limit.

    The field derivatives vanish, so every bound constant stays at desk
    scale and the float oracle transcriptions remain exact.
    """
    grid = grid_for(dx)
    values = (
        np.full(grid.n_cells, float(rho0))
        if np.isscalar(rho0)
        else np.asarray(rho0, dtype=float)
    )
    return Problem(
        grid=grid,
        kernel=build_kernel(eta, delta, grid.dx),
        velocity=VelocityLaw(m),
        flux=FluxModel(constant_speed_limit(grid, v0)),
        rho0=CellField(grid, values),
        config=SolverConfig(T=T, **config),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20250817)


@pytest.fixture
def make_problem():
    """Factory building a Problem from baseline config overrides."""

    def factory(**overrides) -> Problem:
        return build_problem(RunConfig().replaced(**overrides))

    return factory


@pytest.fixture(scope="session")
def baseline_problem() -> Problem:
    return build_problem(RunConfig())


@pytest.fixture(scope="session")
def baseline_solution(baseline_problem):
    """The default experiment solved once for the whole session."""
    return solve(baseline_problem)
