"""A-priori bounds and L1 stability estimates for the nonlocal model.

Implements the closed-form estimates that accompany the solver:

* ``linf_bound`` — exponential L-infinity ceiling ``M_t = |rho_0|_inf *
  exp(L t)`` with growth rate ``L = C |v|_inf + |d_rho f| |v'|_inf
  |rho_0|_L1 |w'|_inf``;
* ``tv_bound`` — total-variation growth ``TV(rho(t)) <= (K2 t + TV(rho_0))
  exp(K1 t)``;
* ``stability_bound_kernel`` — L1 distance of two solutions differing in
  kernel and initial datum, ``(|rho_0 - rho~_0|_L1 + a(t) |w - w~|_W11) *
  exp(int_0^t b)``;
* ``stability_bound_velocity`` — L1 distance of two solutions differing in
  the velocity law, ``(c1(t) |v - v~|_inf + c2(t) |v' - v~'|_inf) *
  exp(int_0^t c3)``;
* ``empirical_stability_ratio`` — runs solver pairs and tabulates empirical
  distances against the theoretical bounds.

Numbers here grow doubly-exponentially: the ceiling ``M_t`` is an exponential
of the model norms, and ``K1`` (a norm over densities up to ``M_t``) feeds a
further exponential.  All bound arithmetic therefore runs in ``mpmath``
arbitrary precision, which represents values with astronomically large
exponents exactly where floats overflow.  The final right-hand sides can be
*triply* exponential — too large for any explicit representation — so every
report carries ``log_bound_value`` (the natural log of the bound, always
representable) as the canonical result, and ``bound_value`` is materialised
only when small enough, with ``inf`` as the overflow sentinel.

Norm conventions (documented once, used throughout):

* velocity norms for a single law are taken over the invariant density
  range [0, 1] (polynomials are unbounded over the whole line);
* velocity *difference* norms are taken over [0, ceiling] with the
  exponential ceiling of the pair, per the stability theorem;
* the growth rate ``L`` uses flux constants over the invariant range [0, 1]
  (the ceiling itself would be circular there); all other slab norms use the
  exponential ceiling of the time in question, refreshed at every quadrature
  node of the time integrals.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import mpmath as mp
import numpy as np
from numpy.polynomial import polynomial as npoly

from .discretization import coarsen, l1_distance, l1_norm, linf_norm, tv
from .errors import PairMismatchError, ParameterError
from .model import (
    Kernel,
    VelocityLaw,
    field_stats,
    kernel_norms,
    kernel_weight,
    kernel_weight_d1,
    velocity_norms,
)
from .solver import Problem, Solution, solve

__all__ = [
    "BoundReport",
    "StabilityRow",
    "linf_bound",
    "tv_bound",
    "stability_bound_kernel",
    "stability_bound_velocity",
    "empirical_stability_ratio",
    "kernel_difference_w11",
    "velocity_difference_norms",
    "discretization_error",
    "format_report",
    "thread_count",
]

#: working precision (decimal digits) for all bound arithmetic
_DPS = 30
#: materialise exp(log_bound) only below this log threshold
_LOG_MATERIALISE = 1e6
#: default number of trapezoid intervals for the time integrals
DEFAULT_QUADRATURE_NODES = 256


def thread_count() -> int:
    """Worker cap for concurrent solves: ``NLWR_THREADS`` or the CPU count."""
    raw = os.environ.get("NLWR_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ParameterError(f"NLWR_THREADS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise ParameterError(f"NLWR_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoundReport:
    """Every constant entering one stability estimate, plus the bound itself.

    ``kind`` is ``"kernel"`` or ``"velocity"``; fields that belong to the
    other estimate are ``None``.  ``log_bound_value`` (natural log, mpmath)
    is the canonical result; ``bound_value`` is its exponential when
    representable and ``mpmath.inf`` otherwise.  All values are finite
    mpmath numbers except that log/bound may be ``-inf``/``0`` for identical
    problems and ``bound_value`` may be the overflow sentinel.
    """

    kind: str
    t: float
    script_l: mp.mpf
    m_t: mp.mpf
    k1: mp.mpf
    k2: mp.mpf
    tv_bound: mp.mpf
    a_t: mp.mpf | None = None
    b_integral: mp.mpf | None = None
    c1: mp.mpf | None = None
    c2: mp.mpf | None = None
    c3_integral: mp.mpf | None = None
    datum_distance: float = 0.0
    kernel_distance: float = 0.0
    velocity_distance: mp.mpf | None = None
    velocity_deriv_distance: mp.mpf | None = None
    log_bound_value: mp.mpf = mp.ninf
    bound_value: mp.mpf = mp.mpf(0)

    def dominates(self, distance: float, slack: float = 0.0) -> bool:
        """Does the bound cover an observed distance, up to ``slack``?

        Compared in log space so overflow-sentinel bounds still rank
        correctly: the bound dominates when ``distance - slack <=
        exp(log_bound_value)``.
        """
        gap = distance - slack
        if gap <= 0.0:
            return True
        return self.log_bound_value >= mp.log(mp.mpf(gap))


@dataclass(frozen=True, eq=False)
class StabilityRow:
    """One line of the empirical-vs-theoretical comparison table."""

    kind: str
    perturbation: float
    distance: float
    report: BoundReport
    ratio: float

    @property
    def bound_holds(self) -> bool:
        return self.report.dominates(self.distance)


# ---------------------------------------------------------------------------
# elementary mpmath pieces
# ---------------------------------------------------------------------------

def _q_sup(m_ceiling: mp.mpf) -> mp.mpf:
    """sup of |r (1 - r)| over [0, M] in arbitrary precision."""
    if m_ceiling <= mp.mpf("0.5"):
        return m_ceiling * (1 - m_ceiling)
    best = mp.mpf("0.25")
    if m_ceiling > 1:
        best = max(best, m_ceiling * (m_ceiling - 1))
    return best


def _slope_sup(m_ceiling: mp.mpf) -> mp.mpf:
    """sup of |1 - 2 r| over [0, M] in arbitrary precision."""
    return max(mp.mpf(1), 2 * m_ceiling - 1)


@dataclass(frozen=True)
class _ModelData:
    """Float-level statistics of one problem, shared by all bound formulas."""

    rho0_l1: float
    rho0_linf: float
    tv0: float
    v_sup: float
    v_lip: float
    v_second: float
    v_w2inf: float
    w_l1: float
    w_linf: float
    dw_l1: float
    dw_linf: float
    ddw_linf: float
    w_w11: float
    dw_w1inf: float
    vmax_sup: float      # field stats over [0, horizon]
    field_d1: float
    field_d2: float

    @classmethod
    def of(cls, p: Problem, horizon: float) -> "_ModelData":
        kn = kernel_norms(p.kernel)
        v_sup, v_lip, v_second, v_w2inf = velocity_norms(p.velocity)
        vmax_sup, d1, d2 = field_stats(p.flux, horizon)
        return cls(
            rho0_l1=l1_norm(p.rho0),
            rho0_linf=linf_norm(p.rho0),
            tv0=tv(p.rho0),
            v_sup=v_sup,
            v_lip=v_lip,
            v_second=v_second,
            v_w2inf=v_w2inf,
            w_l1=kn.w_l1,
            w_linf=kn.w_linf,
            dw_l1=kn.dw_l1,
            dw_linf=kn.dw_linf,
            ddw_linf=kn.ddw_linf,
            w_w11=kn.w_w11,
            dw_w1inf=kn.dw_w1inf,
            vmax_sup=vmax_sup,
            field_d1=d1,
            field_d2=d2,
        )


def _growth_rate(d: _ModelData) -> mp.mpf:
    """Rate ``L = C |v|_inf + |d_rho f| |v'|_inf |rho_0|_L1 |w'|_inf``.

    Flux constants are taken over the invariant density range [0, 1]:
    ``C = 2 max(|d_x V|, |d_xx V|)`` and ``|d_rho f| = sup V`` there.
    """
    c_inv = 2.0 * max(d.field_d1, d.field_d2)
    df_inv = d.vmax_sup
    return (
        mp.mpf(c_inv) * d.v_sup
        + mp.mpf(df_inv) * d.v_lip * d.rho0_l1 * d.dw_linf
    )


def _ceiling(d: _ModelData, rate: mp.mpf, s: float) -> mp.mpf:
    """Exponential ceiling ``M_s = |rho_0|_inf exp(rate * s)``."""
    return mp.mpf(d.rho0_linf) * mp.exp(rate * s)


def _slab_constants(d: _ModelData, m_ceiling: mp.mpf) -> tuple[mp.mpf, mp.mpf, mp.mpf, mp.mpf]:
    """Flux norms over the slab with density ceiling ``M``.

    Returns ``(f_sup, df_sup, dxf_sup, C)`` where ``C`` bounds both
    ``|d_x f| / |rho|`` and ``|d_xx f| / |rho|``.
    """
    q = _q_sup(m_ceiling)
    slope = _slope_sup(m_ceiling)
    f_sup = mp.mpf(d.vmax_sup) * q
    df_sup = mp.mpf(d.vmax_sup) * slope
    dxf_sup = mp.mpf(d.field_d1) * q
    c_hyp = (1 + m_ceiling) * max(d.field_d1, d.field_d2)
    return f_sup, df_sup, dxf_sup, c_hyp


def _tv_constants(d: _ModelData, m_ceiling: mp.mpf) -> tuple[mp.mpf, mp.mpf]:
    """TV-growth constants ``K1``, ``K2`` for the slab ceiling ``M``.

    ``K1 = |d2_{rho x} f| |v|_inf`` with the cross derivative bounded by
    ``|d_x V| * sup|1 - 2 r|``; ``K2`` is the bracketed expression times
    ``|v|_W2inf |rho_0|_L1``.
    """
    _, df_sup, _, c_hyp = _slab_constants(d, m_ceiling)
    cross = mp.mpf(d.field_d1) * _slope_sup(m_ceiling)
    k1 = cross * d.v_sup
    bracket = (
        mp.mpf("1.5") * c_hyp
        + (df_sup + c_hyp) * d.dw_w1inf * d.rho0_l1
        + mp.mpf("0.5")
        * (c_hyp + df_sup * (2 + mp.mpf(d.rho0_l1) * d.dw_linf))
        * d.dw_w1inf
    )
    k2 = bracket * d.v_w2inf * d.rho0_l1
    return k1, k2


def _tv_envelope(k1: mp.mpf, k2: mp.mpf, tv0: float, s: float) -> mp.mpf:
    """TV bound ``(K2 s + TV(rho_0)) exp(K1 s)``."""
    return (k2 * s + tv0) * mp.exp(k1 * s)


# ---------------------------------------------------------------------------
# single-problem bounds
# ---------------------------------------------------------------------------

def linf_bound(p: Problem, t: float) -> tuple[mp.mpf, mp.mpf]:
    """L-infinity ceiling: returns ``(M_t, L)`` with ``M_t = |rho_0|_inf e^{L t}``."""
    if t < 0.0:
        raise ParameterError(f"evaluation time must be non-negative, got {t}")
    with mp.workdps(_DPS):
        d = _ModelData.of(p, t)
        rate = _growth_rate(d)
        return _ceiling(d, rate, t), rate


def tv_bound(p: Problem, t: float) -> tuple[mp.mpf, mp.mpf, mp.mpf]:
    """Total-variation bound: returns ``(K1, K2, (K2 t + TV(rho_0)) e^{K1 t})``."""
    if t < 0.0:
        raise ParameterError(f"evaluation time must be non-negative, got {t}")
    with mp.workdps(_DPS):
        d = _ModelData.of(p, t)
        m_t = _ceiling(d, _growth_rate(d), t)
        k1, k2 = _tv_constants(d, m_t)
        return k1, k2, _tv_envelope(k1, k2, d.tv0, t)


# ---------------------------------------------------------------------------
# pair differences
# ---------------------------------------------------------------------------

def kernel_difference_w11(a: Kernel, b: Kernel, refine: int = 8) -> float:
    """``|w - w~|_W11 = |w - w~|_L1 + |w' - w~'|_L1`` by fine-grid quadrature.

    Both kernels are evaluated from their closed forms on a common grid of
    step ``dx / refine`` covering the union of the supports (midpoint rule).
    """
    if refine < 1:
        raise ParameterError(f"refine must be >= 1, got {refine}")
    lo = min(a.delta - a.eta, b.delta - b.eta)
    hi = max(a.delta + a.eta, b.delta + b.eta)
    h = min(a.dx, b.dx) / refine
    n = int(math.ceil((hi - lo) / h))
    x = lo + (np.arange(n) + 0.5) * h
    dw = kernel_weight(x, a.eta, a.delta) - kernel_weight(x, b.eta, b.delta)
    dw1 = kernel_weight_d1(x, a.eta, a.delta) - kernel_weight_d1(x, b.eta, b.delta)
    return float(h * (np.abs(dw).sum() + np.abs(dw1).sum()))


def velocity_difference_norms(
    a: VelocityLaw, b: VelocityLaw, ceiling: mp.mpf, dense_cap: float = 50.0
) -> tuple[mp.mpf, mp.mpf]:
    """``(|v - v~|_inf, |v' - v~'|_inf)`` over ``[0, ceiling]``.

    The ceiling may be an astronomically large mpmath number; the sup
    combines dense float sampling on the bounded part ``[0, min(ceiling,
    dense_cap)]``, the real critical points of the difference polynomial,
    and exact Horner evaluation at the ceiling itself in mpmath arithmetic.
    """

    def sup_abs(coeffs: np.ndarray) -> mp.mpf:
        if not np.any(coeffs):
            return mp.mpf(0)
        hi_f = float(ceiling) if ceiling < mp.mpf(dense_cap) else dense_cap
        grid = np.linspace(0.0, hi_f, 4097)
        best = mp.mpf(float(np.abs(npoly.polyval(grid, coeffs)).max()))
        der = npoly.polyder(coeffs)
        if der.size > 1 or (der.size == 1 and der[0] != 0.0):
            for r in np.atleast_1d(npoly.polyroots(der)) if der.size > 1 else []:
                if abs(r.imag) < 1e-9 and 0.0 <= r.real and mp.mpf(r.real) <= ceiling:
                    best = max(best, mp.mpf(abs(float(npoly.polyval(r.real, coeffs)))))
        horner = mp.mpf(0)
        for c in coeffs[::-1]:
            horner = horner * ceiling + mp.mpf(float(c))
        return max(best, abs(horner))

    na = a.coefficients(0)
    nb = b.coefficients(0)
    width = max(na.size, nb.size)
    diff0 = np.zeros(width)
    diff0[: na.size] += na
    diff0[: nb.size] -= nb
    diff1 = npoly.polyder(diff0) if width > 1 else np.zeros(1)
    return sup_abs(diff0), sup_abs(np.atleast_1d(diff1))


# ---------------------------------------------------------------------------
# stability bounds
# ---------------------------------------------------------------------------

def _trapezoid(values: Sequence[mp.mpf], step: float) -> mp.mpf:
    acc = (values[0] + values[-1]) / 2
    for v in values[1:-1]:
        acc += v
    return acc * step


def _materialise(prefactor: mp.mpf, exponent: mp.mpf) -> tuple[mp.mpf, mp.mpf]:
    """``(log(prefactor) + exponent, prefactor * exp(exponent) or inf)``.

    The product is materialised only when its log stays below the
    representability threshold; otherwise the sentinel ``mpmath.inf`` is
    returned alongside the always-valid log value.
    """
    if prefactor == 0:
        return mp.ninf, mp.mpf(0)
    log_value = mp.log(prefactor) + exponent
    if log_value < _LOG_MATERIALISE:
        return log_value, prefactor * mp.exp(exponent)
    return log_value, mp.inf


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise PairMismatchError(message)


def stability_bound_kernel(
    p: Problem,
    p_tilde: Problem,
    t: float,
    nodes: int = DEFAULT_QUADRATURE_NODES,
) -> BoundReport:
    """Bound on ``|rho(t) - rho~(t)|_L1`` for problems differing in kernel/datum.

    Evaluates ``(|rho_0 - rho~_0|_L1 + a(t) |w - w~|_W11) exp(int_0^t b)``
    with the coefficient ``a`` and integrand ``b`` spelled out below; the
    time integral of ``b`` uses the composite trapezoid rule on ``nodes``
    intervals with all slab norms refreshed at every node.  The two problems
    must share the grid, the velocity law and the speed-limit field.
    """
    if t < 0.0:
        raise ParameterError(f"evaluation time must be non-negative, got {t}")
    if nodes < 2:
        raise ParameterError(f"need at least 2 quadrature intervals, got {nodes}")
    _require(p.grid == p_tilde.grid, "kernel-stability pair must share the grid")
    _require(
        p.velocity == p_tilde.velocity,
        "kernel-stability pair must share the velocity law",
    )
    _require(
        p.flux.speed_limit.same_family(p_tilde.flux.speed_limit),
        "kernel-stability pair must share the speed-limit field",
    )

    with mp.workdps(_DPS):
        d = _ModelData.of(p, t)
        dt_ = _ModelData.of(p_tilde, t)
        rate = _growth_rate(d)
        rate_t = _growth_rate(dt_)

        min_l1 = min(d.rho0_l1, dt_.rho0_l1)
        min_loadslope = min(d.rho0_l1 * d.dw_linf, dt_.rho0_l1 * dt_.dw_linf)
        velocity_factor = mp.mpf(d.v_lip) + mp.mpf(d.v_second) * min_loadslope

        def coefficient_a(s: float) -> mp.mpf:
            m_s = _ceiling(d, rate, s)
            m_s_tilde = _ceiling(dt_, rate_t, s)
            shared = max(m_s, m_s_tilde)
            f_sup, df_sup, dxf_sup, _ = _slab_constants(d, shared)
            k1, k2 = _tv_constants(d, m_s)
            return s * (
                min_l1 * f_sup * velocity_factor
                + min_l1 * dxf_sup * d.v_lip
                + df_sup
                * _tv_envelope(k1, k2, d.tv0, s)
                * d.v_lip
                * min(m_s, m_s_tilde)
            )

        def integrand_b(s: float) -> mp.mpf:
            m_s = _ceiling(d, rate, s)
            m_s_tilde = _ceiling(dt_, rate_t, s)
            shared = max(m_s, m_s_tilde)
            f_sup, df_sup, dxf_sup, _ = _slab_constants(d, shared)
            k1, k2 = _tv_constants(d, m_s)
            return (
                f_sup * min(d.w_w11, dt_.w_w11) * velocity_factor
                + dxf_sup * d.v_lip * min(d.w_l1, dt_.w_l1)
                + df_sup
                * _tv_envelope(k1, k2, d.tv0, s)
                * d.v_lip
                * min(d.w_linf, dt_.w_linf)
            )

        m_t = _ceiling(d, rate, t)
        k1_t, k2_t = _tv_constants(d, m_t)
        a_t = coefficient_a(t)
        if t == 0.0:
            b_integral = mp.mpf(0)
        else:
            grid_s = np.linspace(0.0, t, nodes + 1)
            b_integral = _trapezoid([integrand_b(float(s)) for s in grid_s], t / nodes)

        datum_distance = l1_distance(p.rho0, p_tilde.rho0)
        kernel_distance = kernel_difference_w11(p.kernel, p_tilde.kernel)
        prefactor = mp.mpf(datum_distance) + a_t * mp.mpf(kernel_distance)
        log_bound, bound = _materialise(prefactor, b_integral)

        return BoundReport(
            kind="kernel",
            t=t,
            script_l=rate,
            m_t=m_t,
            k1=k1_t,
            k2=k2_t,
            tv_bound=_tv_envelope(k1_t, k2_t, d.tv0, t),
            a_t=a_t,
            b_integral=b_integral,
            datum_distance=datum_distance,
            kernel_distance=kernel_distance,
            log_bound_value=log_bound,
            bound_value=bound,
        )


def stability_bound_velocity(
    p: Problem,
    p_tilde: Problem,
    t: float,
    nodes: int = DEFAULT_QUADRATURE_NODES,
) -> BoundReport:
    """Bound on ``|rho(t) - rho~(t)|_L1`` for problems differing in velocity law.

    Evaluates ``(c1(t) |v - v~|_inf + c2(t) |v' - v~'|_inf) exp(int_0^t c3)``.
    The problems must share the grid, kernel, initial datum and speed-limit
    field; density ceilings use the shared rate ``max(L, L~)`` so one slab
    covers both solutions, and the velocity difference norms are taken over
    ``[0, ceiling(t)]``.
    """
    if t < 0.0:
        raise ParameterError(f"evaluation time must be non-negative, got {t}")
    if nodes < 2:
        raise ParameterError(f"need at least 2 quadrature intervals, got {nodes}")
    _require(p.grid == p_tilde.grid, "velocity-stability pair must share the grid")
    _require(
        p.kernel.same_family(p_tilde.kernel),
        "velocity-stability pair must share the kernel",
    )
    _require(
        np.array_equal(p.rho0.values, p_tilde.rho0.values),
        "velocity-stability pair must share the initial datum",
    )
    _require(
        p.flux.speed_limit.same_family(p_tilde.flux.speed_limit),
        "velocity-stability pair must share the speed-limit field",
    )

    with mp.workdps(_DPS):
        d = _ModelData.of(p, t)
        dt_ = _ModelData.of(p_tilde, t)
        shared_rate = max(_growth_rate(d), _growth_rate(dt_))
        min_v_lip = min(d.v_lip, dt_.v_lip)

        def gronwall_core(s: float) -> tuple[mp.mpf, mp.mpf, mp.mpf]:
            """(f_sup, C rho0_L1 + tv_envelope df_sup, ceiling) at time s."""
            g_s = _ceiling(d, shared_rate, s)
            f_sup, df_sup, _, c_hyp = _slab_constants(d, g_s)
            k1, k2 = _tv_constants(d, g_s)
            inner = c_hyp * d.rho0_l1 + _tv_envelope(k1, k2, d.tv0, s) * df_sup
            return f_sup, inner, g_s

        f_sup_t, inner_t, g_t = gronwall_core(t)
        c1 = t * inner_t
        c2 = t * f_sup_t * mp.mpf(d.dw_l1) * d.rho0_l1

        def integrand_c3(s: float) -> mp.mpf:
            f_sup, inner, _ = gronwall_core(s)
            return f_sup * min_v_lip * d.dw_l1 + inner * min_v_lip * d.w_linf

        if t == 0.0:
            c3_integral = mp.mpf(0)
        else:
            grid_s = np.linspace(0.0, t, nodes + 1)
            c3_integral = _trapezoid(
                [integrand_c3(float(s)) for s in grid_s], t / nodes
            )

        dv, dv_prime = velocity_difference_norms(p.velocity, p_tilde.velocity, g_t)
        prefactor = c1 * dv + c2 * dv_prime
        log_bound, bound = _materialise(prefactor, c3_integral)

        k1_t, k2_t = _tv_constants(d, g_t)
        return BoundReport(
            kind="velocity",
            t=t,
            script_l=shared_rate,
            m_t=g_t,
            k1=k1_t,
            k2=k2_t,
            tv_bound=_tv_envelope(k1_t, k2_t, d.tv0, t),
            c1=c1,
            c2=c2,
            c3_integral=c3_integral,
            velocity_distance=dv,
            velocity_deriv_distance=dv_prime,
            log_bound_value=log_bound,
            bound_value=bound,
        )


# ---------------------------------------------------------------------------
# empirical comparison
# ---------------------------------------------------------------------------

def _pair_kind(p: Problem, p_tilde: Problem) -> str:
    if not p.kernel.same_family(p_tilde.kernel):
        return "kernel"
    if p.velocity != p_tilde.velocity:
        return "velocity"
    return "kernel"  # identical problems: zero-perturbation kernel row


def _perturbation_size(kind: str, p: Problem, p_tilde: Problem, t: float) -> float:
    if kind == "kernel":
        return kernel_difference_w11(p.kernel, p_tilde.kernel) + l1_distance(
            p.rho0, p_tilde.rho0
        )
    with mp.workdps(_DPS):
        dv, dv_prime = velocity_difference_norms(
            p.velocity, p_tilde.velocity, mp.mpf(1)
        )
        return float(dv + dv_prime)


def _solve_to(p: Problem, t: float) -> Solution:
    if p.config.T != t:
        p = replace(p, config=replace(p.config, T=t))
    return solve(p)


def empirical_stability_ratio(
    pairs: Sequence[tuple[Problem, Problem]], t: float
) -> list[StabilityRow]:
    """Solve each pair, compare L1 distances at ``t`` with the matching bound.

    Returns one row per pair, sorted by perturbation size (kernel pairs:
    ``|w - w~|_W11`` plus the datum distance; velocity pairs: the sup-norm
    differences over [0, 1]).  The ratio column is distance/perturbation,
    defined as 0 for identical problems.  Solves run concurrently
    (``NLWR_THREADS`` caps the worker count).
    """
    kinds = [_pair_kind(p, q) for p, q in pairs]

    jobs = []
    for p, q in pairs:
        jobs.append(p)
        jobs.append(q)
    with ThreadPoolExecutor(max_workers=min(thread_count(), max(1, len(jobs)))) as pool:
        solutions = list(pool.map(lambda pr: _solve_to(pr, t), jobs))

    rows = []
    for i, ((p, q), kind) in enumerate(zip(pairs, kinds)):
        sol_p = solutions[2 * i]
        sol_q = solutions[2 * i + 1]
        distance = l1_distance(sol_p.final_state, sol_q.final_state)
        if kind == "kernel":
            report = stability_bound_kernel(p, q, t)
        else:
            report = stability_bound_velocity(p, q, t)
        size = _perturbation_size(kind, p, q, t)
        ratio = distance / size if size > 0.0 else 0.0
        rows.append(
            StabilityRow(
                kind=kind,
                perturbation=size,
                distance=distance,
                report=report,
                ratio=ratio,
            )
        )
    rows.sort(key=lambda row: row.perturbation)
    return rows


def discretization_error(make_problem: Callable[[float], Problem], dx: float) -> float:
    """First-order error estimate: ``|rho_dx(T) - rho_{dx/2}(T)|_L1``.

    ``make_problem`` builds the same instance at a requested grid step; the
    fine solution is projected onto the coarse grid by cell-pair averaging.
    Comparisons of empirical distances against the stability bounds should
    allow a slack of twice this estimate.
    """
    coarse = solve(make_problem(dx))
    fine = solve(make_problem(dx / 2.0))
    projected = coarsen(fine.final_state, coarse.grid)
    return l1_distance(projected, coarse.final_state)


# ---------------------------------------------------------------------------
# presentation
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.6g}"
    if mp.isinf(x):
        return "inf (overflow sentinel)" if x > 0 else "-inf"
    if x != 0 and abs(mp.log10(abs(x))) > 1e5:
        # the decimal exponent itself is astronomically long; show its size
        return f"10^({mp.nstr(mp.log10(abs(x)), 8)})"
    return mp.nstr(x, 8, max_fixed=6, min_fixed=-4)


def format_report(report: BoundReport, empirical: float | None = None) -> str:
    """Human-readable block listing every constant of a bound evaluation."""
    lines = [
        f"stability bound ({report.kind} perturbation) at t = {report.t}",
        f"  growth rate L        : {_fmt(report.script_l)}",
        f"  ceiling M_t          : {_fmt(report.m_t)}",
        f"  K1                   : {_fmt(report.k1)}",
        f"  K2                   : {_fmt(report.k2)}",
        f"  TV envelope          : {_fmt(report.tv_bound)}",
    ]
    if report.kind == "kernel":
        lines += [
            f"  a(t)                 : {_fmt(report.a_t)}",
            f"  int_0^t b            : {_fmt(report.b_integral)}",
            f"  |rho0 - rho0~|_L1    : {_fmt(report.datum_distance)}",
            f"  |w - w~|_W11         : {_fmt(report.kernel_distance)}",
        ]
    else:
        lines += [
            f"  c1(t)                : {_fmt(report.c1)}",
            f"  c2(t)                : {_fmt(report.c2)}",
            f"  int_0^t c3           : {_fmt(report.c3_integral)}",
            f"  |v - v~|_inf         : {_fmt(report.velocity_distance)}",
            f"  |v' - v~'|_inf       : {_fmt(report.velocity_deriv_distance)}",
        ]
    lines.append(f"  log bound            : {_fmt(report.log_bound_value)}")
    lines.append(f"  bound                : {_fmt(report.bound_value)}")
    if empirical is not None:
        lines.append(f"  empirical distance   : {_fmt(empirical)}")
        lines.append(f"  bound >= empirical   : {report.dominates(empirical)}")
    return "\n".join(lines)
