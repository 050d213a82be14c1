"""Experiment harness: config files, parameter sweeps, CSV output, CLI.

The config format is flat ``key = value`` text (``#`` starts a comment):

    # baseline instance
    domain = -1, 1
    dx = 0.005
    T = 0.5
    eta = 0.1
    delta = 0.0
    m = 3
    sigma = 0.01
    rho0 = 0.6
    cfl_safety = 0.9
    alpha = auto
    snapshot_stride = 50
    window_a = -0.8
    window_b = -0.3333333333333333

Unknown keys, duplicate keys and malformed values raise
:class:`~nlwr.errors.ConfigError` carrying the file, line and key.

The CLI (``python -m nlwr``) exposes four subcommands: ``solve`` (one run,
snapshot CSV plus a summary line), ``sweep`` (parameter sweep CSV),
``bounds`` (stability-bound report CSV for a problem pair across times) and
``compare`` (empirical-vs-theoretical stability table).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter
from typing import Callable, Sequence

import mpmath as mp

from .bounds import (
    BoundReport,
    empirical_stability_ratio,
    stability_bound_kernel,
    stability_bound_velocity,
    thread_count,
)
from .discretization import Grid1D, constant_field, l1_distance, l1_norm
from .errors import ConfigError, NlwrError
from .functionals import functional_j, functional_psi
from .model import FluxModel, VelocityLaw, build_kernel, build_speed_limit
from .solver import Problem, SolverConfig, solve, write_snapshots

__all__ = [
    "DEFAULT_SIGMA",
    "RunConfig",
    "SweepSpec",
    "SweepRow",
    "baseline_config",
    "parse_config",
    "parse_config_text",
    "build_problem",
    "default_sweep_values",
    "run_sweep",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_bounds_csv",
    "stability_battery",
    "cli_main",
]

#: Gaussian smoothing width of the speed-limit profile, in domain length
#: units.  The default equals ten cells of the reference grid (dx = 0.001):
#: the width at which the reference sweep extremes are reproduced.  A width
#: comparable to the domain would wash out the slow zone entirely.
DEFAULT_SIGMA = 0.01

#: hard invariants a successful sweep row must satisfy
MASS_DRIFT_LIMIT = 1e-10
MIN_DENSITY_LIMIT = -1e-12


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Complete description of one experiment, as read from a config file."""

    x_min: float = -1.0
    x_max: float = 1.0
    dx: float = 0.005
    T: float = 0.5
    eta: float = 0.1
    delta: float = 0.0
    m: int = 3
    sigma: float = DEFAULT_SIGMA
    rho0: float = 0.6
    cfl_safety: float = 0.9
    alpha: float | str = "auto"
    snapshot_stride: int = 50
    window_a: float = -0.8
    window_b: float = -1.0 / 3.0
    limit_outer: float = 7.0
    limit_mid_phase1: float = 3.0
    limit_mid_phase2: float = 1.5
    switch_t1: float = 1.0 / 6.0
    switch_t2: float = 1.0 / 3.0

    def replaced(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def baseline_config() -> RunConfig:
    """The built-in baseline experiment (all defaults)."""
    return RunConfig()


def _parse_float(raw: str) -> float:
    return float(raw)


def _parse_int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(f"expected an integer, got {raw}")
    return int(value)


def _parse_alpha(raw: str):
    if raw.lower() == "auto":
        return "auto"
    return float(raw)


def _parse_domain(raw: str) -> tuple[float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected 'x_min, x_max', got {raw!r}")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValueError(f"domain must satisfy x_min < x_max, got {raw!r}")
    return lo, hi


#: config key -> (value parser, RunConfig field(s) it sets)
_KEY_PARSERS: dict[str, Callable[[str], object]] = {
    "domain": _parse_domain,
    "dx": _parse_float,
    "T": _parse_float,
    "eta": _parse_float,
    "delta": _parse_float,
    "m": _parse_int,
    "sigma": _parse_float,
    "rho0": _parse_float,
    "cfl_safety": _parse_float,
    "alpha": _parse_alpha,
    "snapshot_stride": _parse_int,
    "window_a": _parse_float,
    "window_b": _parse_float,
    "limit_outer": _parse_float,
    "limit_mid_phase1": _parse_float,
    "limit_mid_phase2": _parse_float,
    "switch_t1": _parse_float,
    "switch_t2": _parse_float,
}


def parse_config_text(text: str, path: str = "<config>") -> RunConfig:
    """Parse flat ``key = value`` config text into a :class:`RunConfig`."""
    changes: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"expected 'key = value', got {raw_line.strip()!r}",
                path=path,
                line=lineno,
            )
        key, raw_value = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_PARSERS:
            raise ConfigError("unknown key", path=path, line=lineno, key=key)
        if key in seen:
            raise ConfigError("duplicate key", path=path, line=lineno, key=key)
        seen.add(key)
        try:
            value = _KEY_PARSERS[key](raw_value)
        except ValueError as exc:
            raise ConfigError(str(exc), path=path, line=lineno, key=key) from exc
        if key == "domain":
            changes["x_min"], changes["x_max"] = value  # type: ignore[misc]
        else:
            changes[key] = value
    return RunConfig(**changes)  # type: ignore[arg-type]


def parse_config(path) -> RunConfig:
    """Read and parse a config file; errors name the file and line."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", path=str(path)) from exc
    return parse_config_text(text, path=str(path))


def build_grid(cfg: RunConfig) -> Grid1D:
    length = cfg.x_max - cfg.x_min
    n = round(length / cfg.dx)
    if n < 2 or abs(n * cfg.dx - length) > 1e-9 * length:
        raise ConfigError(
            f"dx={cfg.dx} does not divide the domain length {length}", key="dx"
        )
    return Grid1D(x_min=cfg.x_min, x_max=cfg.x_max, n_cells=n)


def build_problem(cfg: RunConfig) -> Problem:
    """Assemble the full problem an experiment config describes."""
    grid = build_grid(cfg)
    kernel = build_kernel(cfg.eta, cfg.delta, grid.dx)
    velocity = VelocityLaw(cfg.m)
    speed_limit = build_speed_limit(
        cfg.sigma,
        grid,
        time_breaks=(cfg.switch_t1, cfg.switch_t2),
        levels=(cfg.limit_outer, cfg.limit_mid_phase1, cfg.limit_mid_phase2),
    )
    if not 0.0 <= cfg.rho0 <= 1.0:
        raise ConfigError(f"rho0 must lie in [0, 1], got {cfg.rho0}", key="rho0")
    solver_config = SolverConfig(
        T=cfg.T,
        cfl_safety=cfg.cfl_safety,
        alpha_policy=cfg.alpha,
        snapshot_stride=cfg.snapshot_stride,
    )
    return Problem(
        grid=grid,
        kernel=kernel,
        velocity=velocity,
        flux=FluxModel(speed_limit),
        rho0=constant_field(grid, cfg.rho0),
        config=solver_config,
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

_SWEEP_PARAMS = ("eta", "delta", "m")


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep: which knob, its grid, and the fixed base run."""

    param: str
    values: tuple
    base: RunConfig

    def __post_init__(self) -> None:
        if self.param not in _SWEEP_PARAMS:
            raise ConfigError(
                f"sweep parameter must be one of {_SWEEP_PARAMS}, got {self.param!r}",
                key="param",
            )
        if not self.values:
            raise ConfigError("sweep needs at least one value", key="values")
        for v in self.values:
            if self.param == "eta" and not 0.0 < v <= 1.0:
                raise ConfigError(f"eta={v} outside ]0, 1]", key="values")
            if self.param == "delta" and not abs(v) <= self.base.eta:
                raise ConfigError(
                    f"delta={v} outside [-eta, eta] for eta={self.base.eta}",
                    key="values",
                )
            if self.param == "m" and (v != int(v) or v < 1):
                raise ConfigError(f"m={v} must be an integer >= 1", key="values")

    def config_for(self, value) -> RunConfig:
        if self.param == "m":
            return self.base.replaced(m=int(value))
        return self.base.replaced(**{self.param: float(value)})


@dataclass(frozen=True)
class SweepRow:
    """Result of one sweep run; ``error`` is set when the run failed."""

    param: str
    value: float
    J: float
    Psi: float
    steps: int
    mass_drift: float
    min_rho: float
    seconds: float
    error: str | None = None


def default_sweep_values(param: str) -> tuple:
    """The built-in experiment grids for each sweep parameter."""
    if param == "eta":
        return tuple(round(0.1 * k, 12) for k in range(1, 11))
    if param == "delta":
        return tuple(round(-0.1 + 0.02 * k, 12) for k in range(0, 11))
    if param == "m":
        return tuple(range(1, 11))
    raise ConfigError(f"no default grid for parameter {param!r}", key="param")


def _run_sweep_value(spec: SweepSpec, value) -> SweepRow:
    start = perf_counter()
    try:
        cfg = spec.config_for(value)
        solution = solve(build_problem(cfg))
        j_value = functional_j(solution)
        psi_value = functional_psi(solution, cfg.window_a, cfg.window_b)
        if solution.mass_drift > MASS_DRIFT_LIMIT:
            raise NlwrError(f"mass drift {solution.mass_drift} exceeds {MASS_DRIFT_LIMIT}")
        if solution.min_density < MIN_DENSITY_LIMIT:
            raise NlwrError(f"min density {solution.min_density} below {MIN_DENSITY_LIMIT}")
        return SweepRow(
            param=spec.param,
            value=value,
            J=j_value,
            Psi=psi_value,
            steps=solution.n_steps,
            mass_drift=solution.mass_drift,
            min_rho=solution.min_density,
            seconds=perf_counter() - start,
        )
    except Exception as exc:  # failed rows keep their place in the table
        return SweepRow(
            param=spec.param,
            value=value,
            J=math.nan,
            Psi=math.nan,
            steps=0,
            mass_drift=math.nan,
            min_rho=math.nan,
            seconds=perf_counter() - start,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """One solve per grid value, concurrently; rows sorted by value.

    Failed runs produce rows with NaN metrics and an error message instead
    of aborting the sweep, so the row count always matches the grid.
    """
    values = sorted(spec.values)
    workers = min(thread_count(), len(values))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda v: _run_sweep_value(spec, v), values))
    return rows


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def _sweep_metadata(spec: SweepSpec) -> str:
    base = spec.base
    fixed = {p: getattr(base, p) for p in _SWEEP_PARAMS if p != spec.param}
    fixed_text = " ".join(f"{k}={v:.17g}" for k, v in fixed.items())
    return (
        f"# nlwr sweep param={spec.param} {fixed_text} sigma={base.sigma:.17g} "
        f"dx={base.dx:.17g} T={base.T:.17g} cfl_safety={base.cfl_safety:.17g} "
        f"alpha={base.alpha} rho0={base.rho0:.17g} "
        f"window=[{base.window_a:.17g},{base.window_b:.17g}]"
    )


def write_sweep_csv(rows: Sequence[SweepRow], spec: SweepSpec, path) -> None:
    """Sweep CSV: metadata comment, header, one row per grid value.

    Failed rows carry NaN metrics and are preceded by a ``# error`` comment
    naming the offending value.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(_sweep_metadata(spec) + "\n")
        handle.write("param,value,J,Psi,steps,mass_drift,min_rho,seconds\n")
        for row in rows:
            if row.error is not None:
                handle.write(f"# error value={row.value:.17g}: {row.error}\n")
            handle.write(
                f"{row.param},{row.value:.17g},{row.J:.17g},{row.Psi:.17g},"
                f"{row.steps},{row.mass_drift:.17g},{row.min_rho:.17g},"
                f"{row.seconds:.17g}\n"
            )


def read_sweep_csv(path) -> list[SweepRow]:
    """Parse a sweep CSV back into rows (17 significant digits round-trip)."""
    rows: list[SweepRow] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        pending_error: str | None = None
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# error"):
                    pending_error = line.split(":", 1)[1].strip() if ":" in line else line
                continue
            if line.startswith("param,"):
                continue
            fields = line.split(",")
            if len(fields) != 8:
                raise ConfigError(
                    f"expected 8 CSV fields, got {len(fields)}", path=str(path)
                )
            rows.append(
                SweepRow(
                    param=fields[0],
                    value=float(fields[1]),
                    J=float(fields[2]),
                    Psi=float(fields[3]),
                    steps=int(fields[4]),
                    mass_drift=float(fields[5]),
                    min_rho=float(fields[6]),
                    seconds=float(fields[7]),
                    error=pending_error,
                )
            )
            pending_error = None
    return rows


def _csv_mpf(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float):
        return f"{x:.17g}"
    if mp.isinf(x):
        return "inf"
    return mp.nstr(x, 17, max_fixed=6, min_fixed=-4)


def write_bounds_csv(
    reports: Sequence[tuple[BoundReport, float]], path, comment: str | None = None
) -> None:
    """Bound-report CSV: one row per evaluation time plus the empirical distance."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if comment:
            handle.write(f"# {comment}\n")
        handle.write("t,L,Mt,K1,K2,a,int_b,c1,c2,int_c3,bound,empirical\n")
        for report, empirical in reports:
            cells = [
                f"{report.t:.17g}",
                _csv_mpf(report.script_l),
                _csv_mpf(report.m_t),
                _csv_mpf(report.k1),
                _csv_mpf(report.k2),
                _csv_mpf(report.a_t),
                _csv_mpf(report.b_integral),
                _csv_mpf(report.c1),
                _csv_mpf(report.c2),
                _csv_mpf(report.c3_integral),
                _csv_mpf(report.bound_value),
                f"{empirical:.17g}",
            ]
            handle.write(",".join(cells) + "\n")


# ---------------------------------------------------------------------------
# built-in stability battery
# ---------------------------------------------------------------------------

def stability_battery(cfg: RunConfig | None = None) -> list[tuple[Problem, Problem]]:
    """The fixed comparison battery: 6 kernel pairs and 4 velocity pairs.

    Kernel pairs perturb the offset (three halvings for the Lipschitz
    trend), the radius (twice) and the initial datum (once); velocity pairs
    perturb the exponent of the velocity law.
    """
    cfg = cfg or baseline_config()
    base = build_problem(cfg)

    def variant(**changes) -> Problem:
        return build_problem(cfg.replaced(**changes))

    kernel_pairs = [
        (base, variant(delta=0.01)),
        (base, variant(delta=0.02)),
        (base, variant(delta=0.04)),
        (base, variant(eta=0.15)),
        (base, variant(eta=0.2)),
        (base, variant(rho0=0.58)),
    ]
    velocity_pairs = [
        (base, variant(m=2)),
        (base, variant(m=4)),
        (base, variant(m=5)),
        (base, variant(m=6)),
    ]
    return kernel_pairs + velocity_pairs


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = parse_config(args.config) if args.config else baseline_config()
    overrides = {}
    for name in ("dx", "T", "eta", "delta", "m", "sigma"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return cfg.replaced(**overrides) if overrides else cfg


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--dx", type=float, help="grid step override")
    parser.add_argument("--T", type=float, help="horizon override")
    parser.add_argument("--eta", type=float, help="kernel radius override")
    parser.add_argument("--delta", type=float, help="kernel offset override")
    parser.add_argument("--m", type=int, help="velocity exponent override")
    parser.add_argument("--sigma", type=float, help="speed-limit smoothing override")


def _cmd_solve(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    solution = solve(build_problem(cfg))
    write_snapshots(solution, args.output)
    final = solution.final_state
    print(
        f"mass={l1_norm(final):.12g} min={solution.min_density:.6g} "
        f"max={float(solution.snapshots.max()):.6g} "
        f"J={functional_j(solution):.12g} "
        f"Psi={functional_psi(solution, cfg.window_a, cfg.window_b):.12g}"
    )
    print(f"snapshots written to {args.output}")
    return 0


def _parse_values_flag(raw: str, param: str) -> tuple:
    items = [part.strip() for part in raw.split(",") if part.strip()]
    if param == "m":
        return tuple(int(float(v)) for v in items)
    return tuple(float(v) for v in items)


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.values:
        values = _parse_values_flag(args.values, args.param)
    elif args.from_ is not None or args.to is not None or args.step is not None:
        if args.from_ is None or args.to is None or args.step is None or args.step <= 0:
            raise ConfigError("--from/--to/--step must be given together with step > 0")
        count = int(round((args.to - args.from_) / args.step))
        values = tuple(round(args.from_ + k * args.step, 12) for k in range(count + 1))
        if args.param == "m":
            values = tuple(int(v) for v in values)
    else:
        values = default_sweep_values(args.param)
    spec = SweepSpec(param=args.param, values=values, base=cfg)
    rows = run_sweep(spec)
    write_sweep_csv(rows, spec, args.output)
    failures = [row for row in rows if row.error is not None]
    print(f"{len(rows)} rows written to {args.output} ({len(failures)} failed)")
    for row in failures:
        print(f"  value={row.value}: {row.error}", file=sys.stderr)
    return 0 if not failures else 1


def _parse_times_flag(raw: str, horizon: float) -> list[float]:
    times = sorted({float(part) for part in raw.split(",") if part.strip()})
    if not times:
        raise ConfigError("--times must list at least one time", key="times")
    for t in times:
        if not 0.0 < t <= horizon:
            raise ConfigError(f"time {t} outside ]0, T={horizon}]", key="times")
    return times


def _cmd_bounds(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    perturbed: dict[str, object] = {}
    if args.m2 is not None:
        perturbed["m"] = args.m2
        kind = "velocity"
    else:
        kind = "kernel"
        if args.eta2 is not None:
            perturbed["eta"] = args.eta2
        if args.delta2 is not None:
            perturbed["delta"] = args.delta2
        if args.rho02 is not None:
            perturbed["rho0"] = args.rho02
        if not perturbed:
            raise ConfigError(
                "bounds needs a perturbation: --m2 (velocity) or "
                "--eta2/--delta2/--rho02 (kernel)"
            )
    times = _parse_times_flag(args.times, cfg.T)

    run_cfg = cfg.replaced(T=times[-1])
    clip = tuple(times[:-1])
    base_problem = build_problem(run_cfg)
    tilde_problem = build_problem(run_cfg.replaced(**perturbed))
    base_problem = dataclasses.replace(
        base_problem, config=dataclasses.replace(base_problem.config, clip_times=clip)
    )
    tilde_problem = dataclasses.replace(
        tilde_problem, config=dataclasses.replace(tilde_problem.config, clip_times=clip)
    )
    with ThreadPoolExecutor(max_workers=min(2, thread_count())) as pool:
        sol_base, sol_tilde = pool.map(solve, [base_problem, tilde_problem])

    bound_of = stability_bound_velocity if kind == "velocity" else stability_bound_kernel
    reports = []
    for t in times:
        empirical = l1_distance(
            sol_base.state_at_time(t), sol_tilde.state_at_time(t)
        )
        reports.append((bound_of(base_problem, tilde_problem, t), empirical))
    comment = f"nlwr bounds kind={kind} perturbation={perturbed}"
    write_bounds_csv(reports, args.output, comment=comment)
    print(f"{len(reports)} bound rows written to {args.output}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if args.t is not None:
        cfg = cfg.replaced(T=args.t)
    pairs = stability_battery(cfg)
    rows = empirical_stability_ratio(pairs, cfg.T)
    with open(args.output, "w", encoding="utf-8", newline="") as handle:
        handle.write("kind,perturbation,distance,ratio,log_bound,holds\n")
        for row in rows:
            handle.write(
                f"{row.kind},{row.perturbation:.17g},{row.distance:.17g},"
                f"{row.ratio:.17g},{_csv_mpf(row.report.log_bound_value)},"
                f"{row.bound_holds}\n"
            )
    print(f"{'kind':<9} {'perturbation':>13} {'distance':>12} {'ratio':>9}  bound holds")
    for row in rows:
        print(
            f"{row.kind:<9} {row.perturbation:>13.6g} {row.distance:>12.6g} "
            f"{row.ratio:>9.4g}  {row.bound_holds}"
        )
    print(f"table written to {args.output}")
    return 0 if all(row.bound_holds for row in rows) else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlwr",
        description="Nonlocal traffic-flow simulation and stability estimates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one simulation, write snapshot CSV")
    _add_override_flags(p_solve)
    p_solve.add_argument("--output", default="snapshots.csv", help="snapshot CSV path")
    p_solve.set_defaults(func=_cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep, write sweep CSV")
    _add_override_flags(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=_SWEEP_PARAMS)
    p_sweep.add_argument("--from", dest="from_", type=float, help="first grid value")
    p_sweep.add_argument("--to", type=float, help="last grid value (inclusive)")
    p_sweep.add_argument("--step", type=float, help="grid spacing")
    p_sweep.add_argument("--values", help="explicit comma-separated grid values")
    p_sweep.add_argument("--output", default=None, help="sweep CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_bounds = sub.add_parser(
        "bounds", help="evaluate a stability bound for a problem pair over time"
    )
    _add_override_flags(p_bounds)
    p_bounds.add_argument("--eta2", type=float, help="perturbed kernel radius")
    p_bounds.add_argument("--delta2", type=float, help="perturbed kernel offset")
    p_bounds.add_argument("--rho02", type=float, help="perturbed initial density")
    p_bounds.add_argument("--m2", type=int, help="perturbed velocity exponent")
    p_bounds.add_argument(
        "--times", default="0.1,0.2,0.3,0.4,0.5", help="comma-separated report times"
    )
    p_bounds.add_argument("--output", default="bounds.csv", help="bound CSV path")
    p_bounds.set_defaults(func=_cmd_bounds)

    p_compare = sub.add_parser(
        "compare", help="empirical vs theoretical stability on the built-in battery"
    )
    _add_override_flags(p_compare)
    p_compare.add_argument("--t", type=float, help="comparison time (default: T)")
    p_compare.add_argument("--output", default="compare.csv", help="table CSV path")
    p_compare.set_defaults(func=_cmd_compare)

    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code instead of raising."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if getattr(args, "command", None) == "sweep" and args.output is None:
        args.output = f"sweep_{args.param}.csv"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"nlwr: {exc}", file=sys.stderr)
        return 2
    except NlwrError as exc:
        print(f"nlwr: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"nlwr: {exc}", file=sys.stderr)
        return 1
