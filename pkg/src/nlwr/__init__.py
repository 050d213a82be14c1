"""nlwr: finite-volume simulation and stability estimates for a nonlocal
traffic-flow conservation law.

The package simulates ``d_t rho + d_x(f(t,x,rho) v((w*rho)(x))) = 0`` on a
periodic road — a traffic model whose speed adapts to a convolution average
of the nearby density — and evaluates the closed-form a-priori bounds
(L-infinity ceiling, total-variation growth) and L1 stability estimates
(kernel/datum and velocity-law perturbations) that come with the model.
Congestion functionals and parameter-sweep tooling reproduce how traffic
responds to the kernel radius/offset and the velocity exponent.

Typical use::

    from nlwr import baseline_config, build_problem, solve, functional_j

    solution = solve(build_problem(baseline_config()))
    print(functional_j(solution))
"""

from .bounds import (
    BoundReport,
    StabilityRow,
    discretization_error,
    empirical_stability_ratio,
    format_report,
    kernel_difference_w11,
    linf_bound,
    stability_bound_kernel,
    stability_bound_velocity,
    tv_bound,
    velocity_difference_norms,
)
from .discretization import (
    CellField,
    ConvolutionOperator,
    Grid1D,
    coarsen,
    constant_field,
    convolve,
    l1_distance,
    l1_norm,
    linf_norm,
    tv,
)
from .errors import (
    CFLViolationError,
    ConfigError,
    DensityBoundsError,
    GridMismatchError,
    KernelSupportError,
    NlwrError,
    NonFiniteStateError,
    PairMismatchError,
    ParameterError,
    WindowError,
)
from .functionals import DEFAULT_QUEUE_WEIGHT, QueueWeight, functional_j, functional_psi
from .harness import (
    DEFAULT_SIGMA,
    RunConfig,
    SweepRow,
    SweepSpec,
    baseline_config,
    build_problem,
    cli_main,
    default_sweep_values,
    parse_config,
    parse_config_text,
    read_sweep_csv,
    run_sweep,
    stability_battery,
    write_sweep_csv,
)
from .model import (
    FluxModel,
    Kernel,
    NormBundle,
    SpeedLimitField,
    VelocityLaw,
    build_kernel,
    build_speed_limit,
    constant_speed_limit,
    flux_eval,
    flux_norms,
    kernel_norms,
    problem_norms,
    velocity_deriv,
    velocity_eval,
    velocity_norms,
)
from .solver import (
    Problem,
    Solution,
    SolverConfig,
    cfl_dt,
    resolve_alpha,
    solve,
    step,
    write_snapshots,
)

__version__ = "0.1.0"
