"""Model functions and their norms: kernel, velocity law, speed limit, flux.

The built-in model family is

* convolution kernel
  ``w(x) = (16 / (5 pi eta^6)) * (eta^2 - (x - delta)^2)^(5/2)`` on
  ``[delta - eta, delta + eta]`` and zero elsewhere — unit mass, peak value
  ``16 / (5 pi eta)`` at ``x = delta``;
* velocity law ``v(rho) = (1 - rho)^(m-1) * (1 + rho)^m`` for an integer
  exponent ``m >= 1``;
* flux ``f(t, x, rho) = V_max(t, x) * rho * (1 - rho)`` where the speed
  limit ``V_max`` is a Gaussian-smoothed piecewise profile that switches
  between two spatial shapes on fixed time slabs.

Besides evaluation, this module computes every continuous-function norm the
a-priori and stability bounds consume (:class:`NormBundle`).  All objects are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import erf

from .discretization import Grid1D
from .errors import ParameterError

__all__ = [
    "Kernel",
    "VelocityLaw",
    "SpeedLimitField",
    "FluxModel",
    "NormBundle",
    "KERNEL_SCALE",
    "build_kernel",
    "kernel_weight",
    "kernel_weight_d1",
    "kernel_weight_d2",
    "kernel_norms",
    "velocity_eval",
    "velocity_deriv",
    "velocity_norms",
    "build_speed_limit",
    "constant_speed_limit",
    "flux_eval",
    "flux_norms",
    "field_stats",
    "parabola_sup",
    "parabola_slope_sup",
    "problem_norms",
]

#: normalisation constant of the kernel family, 16 / (5 pi)
KERNEL_SCALE = 16.0 / (5.0 * math.pi)


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------

def kernel_weight(x, eta: float, delta: float):
    """Closed-form kernel value ``w_{eta,delta}(x)`` (vectorised)."""
    u = np.asarray(x, dtype=float) - delta
    s = eta * eta - u * u
    return KERNEL_SCALE / eta**6 * np.where(s > 0.0, s, 0.0) ** 2.5


def kernel_weight_d1(x, eta: float, delta: float):
    """First derivative ``w'(x) = -(16/(pi eta^6)) (x-delta) (eta^2-(x-delta)^2)^(3/2)``."""
    u = np.asarray(x, dtype=float) - delta
    s = np.maximum(eta * eta - u * u, 0.0)
    return -16.0 / (math.pi * eta**6) * u * s**1.5


def kernel_weight_d2(x, eta: float, delta: float):
    """Second derivative ``w''(x) = -(16/(pi eta^6)) sqrt(eta^2-u^2) (eta^2-4u^2)``."""
    u = np.asarray(x, dtype=float) - delta
    s = np.maximum(eta * eta - u * u, 0.0)
    return -16.0 / (math.pi * eta**6) * np.sqrt(s) * (eta * eta - 4.0 * u * u)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Sampled convolution weight ``w_{eta,delta}``.

    ``offsets[i]`` is the integer offset ``k`` of sample ``weights[i] =
    w(k * dx)``; derivative samples are evaluated from the closed forms.
    """

    eta: float
    delta: float
    dx: float
    offsets: np.ndarray
    weights: np.ndarray
    d1_weights: np.ndarray
    d2_weights: np.ndarray

    @property
    def support(self) -> tuple[float, float]:
        return (self.delta - self.eta, self.delta + self.eta)

    def same_family(self, other: "Kernel") -> bool:
        """True when both kernels share (eta, delta, dx)."""
        return (
            self.eta == other.eta
            and self.delta == other.delta
            and self.dx == other.dx
        )


def build_kernel(eta: float, delta: float, dx: float) -> Kernel:
    """Sample the kernel family at offsets ``k*dx`` covering its support.

    Requires ``0 < eta <= 1``, ``|delta| <= eta`` and ``0 < dx < eta`` (at
    least two samples inside the support).
    """
    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"kernel radius eta must be in ]0, 1], got {eta}")
    if not -eta <= delta <= eta:
        raise ParameterError(
            f"kernel offset delta must satisfy |delta| <= eta={eta}, got {delta}"
        )
    if not 0.0 < dx < eta:
        raise ParameterError(
            f"sampling step dx must satisfy 0 < dx < eta={eta}, got {dx}"
        )
    k_min = math.ceil((delta - eta) / dx - 1e-12)
    k_max = math.floor((delta + eta) / dx + 1e-12)
    offsets = np.arange(k_min, k_max + 1)
    x = offsets * dx
    return Kernel(
        eta=float(eta),
        delta=float(delta),
        dx=float(dx),
        offsets=offsets,
        weights=kernel_weight(x, eta, delta),
        d1_weights=kernel_weight_d1(x, eta, delta),
        d2_weights=kernel_weight_d2(x, eta, delta),
    )


# ---------------------------------------------------------------------------
# velocity law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VelocityLaw:
    """Polynomial velocity law ``v(rho) = (1 - rho)^(m-1) (1 + rho)^m``."""

    m: int = 3

    def __post_init__(self) -> None:
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ParameterError(f"velocity exponent m must be an integer >= 1, got {self.m}")

    def coefficients(self, order: int = 0) -> np.ndarray:
        """Coefficients (ascending powers) of the ``order``-th derivative of v."""
        c = npoly.polymul(
            npoly.polypow([1.0, -1.0], self.m - 1),
            npoly.polypow([1.0, 1.0], self.m),
        )
        for _ in range(order):
            c = npoly.polyder(c)
        return np.atleast_1d(c)


def velocity_eval(law: VelocityLaw, rho):
    """Evaluate ``v(rho)`` exactly (vectorised polynomial evaluation)."""
    return npoly.polyval(rho, law.coefficients())


def velocity_deriv(law: VelocityLaw, rho, order: int = 1):
    """Evaluate the ``order``-th derivative of ``v`` at ``rho``."""
    return npoly.polyval(rho, law.coefficients(order))


def _poly_sup(coeffs: np.ndarray, lo: float, hi: float, samples: int = 65537) -> float:
    """Sup of ``|p|`` on ``[lo, hi]``: dense sampling refined with the real
    critical points of ``p`` (roots of ``p'``)."""
    cands = [lo, hi]
    der = npoly.polyder(coeffs)
    if len(der) > 1 or (len(der) == 1 and der[0] != 0.0):
        roots = npoly.polyroots(der) if len(der) > 1 else []
        for r in np.atleast_1d(roots):
            if abs(r.imag) < 1e-9 and lo <= r.real <= hi:
                cands.append(float(r.real))
    grid = np.linspace(lo, hi, samples)
    best = float(np.abs(npoly.polyval(grid, coeffs)).max())
    for c in cands:
        best = max(best, abs(float(npoly.polyval(c, coeffs))))
    return best


def velocity_norms(law: VelocityLaw, rho_ref: float = 1.0) -> tuple[float, float, float, float]:
    """Sup norms of ``v``, ``v'``, ``v''`` over ``[0, rho_ref]``.

    Returns ``(v_sup, v_lip, v_second, v_w2inf)`` where the W^{2,inf} norm is
    the maximum of the three (maximum-over-orders convention).  ``rho_ref``
    must be at least 1 so the range covers the whole admissible density
    interval.
    """
    if rho_ref < 1.0:
        raise ParameterError(f"rho_ref must be >= 1, got {rho_ref}")
    v_sup = _poly_sup(law.coefficients(0), 0.0, rho_ref)
    v_lip = _poly_sup(law.coefficients(1), 0.0, rho_ref)
    v_second = _poly_sup(law.coefficients(2), 0.0, rho_ref)
    return v_sup, v_lip, v_second, max(v_sup, v_lip, v_second)


# ---------------------------------------------------------------------------
# speed limit field
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpeedLimitField:
    """Space-time speed limit: two smoothed spatial profiles on time slabs.

    The raw profiles take the value ``levels[0]`` outside ``]zone[0],
    zone[1]]`` and ``levels[1]`` (phase one) or ``levels[2]`` (phase two)
    inside it.  Phase two is active for ``time_breaks[0] < t <=
    time_breaks[1]``; phase one everywhere else.  Both profiles are the exact
    Gaussian smoothing (standard deviation ``sigma``, periodised over the
    circle) of the piecewise-constant raw profile, evaluated at cell centers.
    The smoothed profile is therefore a fixed function of ``x``, independent
    of the grid resolution, which keeps refinement studies consistent.
    """

    sigma: float
    grid: Grid1D
    time_breaks: tuple[float, float]
    zone: tuple[float, float]
    levels: tuple[float, float, float]
    raw_profiles: np.ndarray       # shape (2, n_cells)
    smoothed_profiles: np.ndarray  # shape (2, n_cells)

    def profile_index(self, t: float) -> int:
        lo, hi = self.time_breaks
        return 1 if lo < t <= hi else 0

    def values_at(self, t: float) -> np.ndarray:
        """Smoothed speed-limit profile active at time ``t``."""
        return self.smoothed_profiles[self.profile_index(t)]

    def value(self, t: float, j: int) -> float:
        return float(self.values_at(t)[j])

    def profiles_up_to(self, t: float) -> np.ndarray:
        """All smoothed profiles the field takes on ``[0, t]``."""
        if t > self.time_breaks[0]:
            return self.smoothed_profiles
        return self.smoothed_profiles[:1]

    def same_family(self, other: "SpeedLimitField") -> bool:
        return (
            self.sigma == other.sigma
            and self.time_breaks == other.time_breaks
            and self.zone == other.zone
            and self.levels == other.levels
            and self.grid == other.grid
        )


def _smoothed_zone_fraction(
    x: np.ndarray, zone: tuple[float, float], length: float, sigma: float
) -> np.ndarray:
    """Gaussian smoothing of the periodic indicator of ``]zone[0], zone[1]]``.

    Closed form: the convolution of a unit-mass Gaussian with an interval
    indicator is a difference of normal CDFs; periodicity is recovered by
    summing over periodic images until further images contribute less than
    machine precision.
    """
    a, b = zone
    images = int(math.ceil((8.0 * sigma + (b - a)) / length)) + 1
    scale = 1.0 / (math.sqrt(2.0) * sigma)
    acc = np.zeros_like(x, dtype=float)
    for k in range(-images, images + 1):
        shift = k * length
        acc += 0.5 * (
            erf((x - a + shift) * scale) - erf((x - b + shift) * scale)
        )
    return acc


def build_speed_limit(
    sigma: float,
    grid: Grid1D,
    time_breaks: tuple[float, float] = (1.0 / 6.0, 1.0 / 3.0),
    zone: tuple[float, float] = (-1.0 / 3.0, 1.0 / 3.0),
    levels: tuple[float, float, float] = (7.0, 3.0, 1.5),
) -> SpeedLimitField:
    """Construct the smoothed speed-limit field on a grid.

    ``levels = (outer, mid_phase1, mid_phase2)``: the middle zone drops from
    ``mid_phase1`` to ``mid_phase2`` during ``]time_breaks[0],
    time_breaks[1]]`` and recovers afterwards.
    """
    if sigma <= 0.0:
        raise ParameterError(f"gaussian sigma must be positive, got {sigma}")
    if not time_breaks[0] < time_breaks[1]:
        raise ParameterError(f"time breaks must increase, got {time_breaks}")
    centers = grid.centers()
    mid = (centers > zone[0]) & (centers <= zone[1])
    raw = np.empty((2, grid.n_cells))
    fraction = _smoothed_zone_fraction(centers, zone, grid.length, sigma)
    smoothed = np.empty((2, grid.n_cells))
    for i, mid_level in enumerate(levels[1:]):
        raw[i] = np.where(mid, mid_level, levels[0])
        smoothed[i] = levels[0] + (mid_level - levels[0]) * fraction
    return SpeedLimitField(
        sigma=float(sigma),
        grid=grid,
        time_breaks=(float(time_breaks[0]), float(time_breaks[1])),
        zone=(float(zone[0]), float(zone[1])),
        levels=tuple(float(v) for v in levels),
        raw_profiles=raw,
        smoothed_profiles=smoothed,
    )


def constant_speed_limit(grid: Grid1D, value: float) -> SpeedLimitField:
    """Speed limit that is the same constant everywhere and at all times."""
    flat = np.full((2, grid.n_cells), float(value))
    return SpeedLimitField(
        sigma=1.0,
        grid=grid,
        time_breaks=(1.0 / 6.0, 1.0 / 3.0),
        zone=(-1.0 / 3.0, 1.0 / 3.0),
        levels=(float(value),) * 3,
        raw_profiles=flat.copy(),
        smoothed_profiles=flat,
    )


# ---------------------------------------------------------------------------
# flux
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FluxModel:
    """Flux ``f(t, x, rho) = V_max(t, x) * rho * (1 - rho)``."""

    speed_limit: SpeedLimitField

    @property
    def grid(self) -> Grid1D:
        return self.speed_limit.grid


def flux_eval(fm: FluxModel, t: float, j: int, rho):
    """Evaluate ``f(t, x_j, rho) = V_max(t, x_j) * rho * (1 - rho)``."""
    rho = np.asarray(rho, dtype=float)
    return fm.speed_limit.value(t, j) * rho * (1.0 - rho)


def _centered_diff_max(values: np.ndarray, dx: float, order: int) -> float:
    """Max absolute centered finite difference (periodic) of given order."""
    if order == 1:
        d = (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * dx)
    elif order == 2:
        d = (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / dx**2
    else:  # pragma: no cover - internal misuse
        raise ValueError(order)
    return float(np.abs(d).max())


def field_stats(fm: FluxModel, t: float) -> tuple[float, float, float]:
    """Grid statistics of the speed limit over the time window ``[0, t]``.

    Returns ``(vmax_sup, d1_sup, d2_sup)``: the largest value, largest
    absolute spatial slope, and largest absolute spatial curvature taken over
    every profile active within ``[0, t]`` (finite differences on the grid).
    """
    profiles = fm.speed_limit.profiles_up_to(t)
    dx = fm.grid.dx
    vmax_sup = float(profiles.max())
    d1 = max(_centered_diff_max(p, dx, 1) for p in profiles)
    d2 = max(_centered_diff_max(p, dx, 2) for p in profiles)
    return vmax_sup, d1, d2


def parabola_sup(rho_max: float) -> float:
    """Sup of ``|rho (1 - rho)|`` over ``[0, rho_max]``."""
    if rho_max < 0.0:
        raise ParameterError(f"rho_max must be non-negative, got {rho_max}")
    interior = 0.25 if rho_max >= 0.5 else rho_max * (1.0 - rho_max)
    endpoint = rho_max * (rho_max - 1.0) if rho_max > 1.0 else 0.0
    return max(interior, endpoint)


def parabola_slope_sup(rho_max: float) -> float:
    """Sup of ``|1 - 2 rho|`` over ``[0, rho_max]``."""
    return max(1.0, 2.0 * rho_max - 1.0)


# ---------------------------------------------------------------------------
# norm bundle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormBundle:
    """Continuous-function norms consumed by the CFL condition and bounds.

    Fields default to ``None`` so that partial bundles (kernel-only,
    flux-only) can be produced by the individual norm operations and merged;
    every value that is present must be non-negative.

    ``w_w11 = w_l1 + dw_l1`` is the W^{1,1} norm of the kernel and
    ``dw_w1inf = max(dw_linf, ddw_linf)`` the W^{1,inf} norm of its
    derivative (maximum-over-orders convention throughout).  ``C`` is the
    constant with ``sup_x |d_x f| <= C |rho|`` and ``sup_x |d_xx f| <= C
    |rho|`` estimated from grid finite differences of the speed limit.
    """

    v_sup: float | None = None
    v_lip: float | None = None
    v_second: float | None = None
    v_w2inf: float | None = None
    w_l1: float | None = None
    w_linf: float | None = None
    dw_l1: float | None = None
    dw_linf: float | None = None
    ddw_linf: float | None = None
    w_w11: float | None = None
    f_sup: float | None = None
    df_drho_sup: float | None = None
    dxf_sup: float | None = None
    dxf_drho_cross: float | None = None
    C: float | None = None

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value is not None and not value >= 0.0:
                raise ParameterError(f"norm {name} must be non-negative, got {value}")
        if self.w_w11 is not None and self.w_l1 is not None:
            if self.w_w11 < self.w_l1:
                raise ParameterError("w_w11 must dominate w_l1")

    @property
    def dw_w1inf(self) -> float:
        """W^{1,inf} norm of the kernel derivative, max(dw_linf, ddw_linf)."""
        return max(self.dw_linf, self.ddw_linf)

    def merged(self, other: "NormBundle") -> "NormBundle":
        """Combine two partial bundles; ``other`` wins where both are set."""
        data = {k: v for k, v in self.__dict__.items()}
        data.update({k: v for k, v in other.__dict__.items() if v is not None})
        return NormBundle(**data)


def kernel_norms(k: Kernel) -> NormBundle:
    """Kernel norms: closed forms for sup norms, sample quadrature for L1.

    * ``w_linf  = 16 / (5 pi eta)``        (peak at x = delta)
    * ``dw_linf = 3 sqrt(3) / (pi eta^2)``
    * ``ddw_linf = 16 / (pi eta^3)``
    * ``w_l1``, ``dw_l1`` by midpoint quadrature of the analytic samples
      (analytically 1 and ``32 / (5 pi eta)``, accurate to O(dx^2)).
    """
    w_l1 = float(k.dx * np.abs(k.weights).sum())
    dw_l1 = float(k.dx * np.abs(k.d1_weights).sum())
    return NormBundle(
        w_l1=w_l1,
        w_linf=KERNEL_SCALE / k.eta,
        dw_l1=dw_l1,
        dw_linf=3.0 * math.sqrt(3.0) / (math.pi * k.eta**2),
        ddw_linf=16.0 / (math.pi * k.eta**3),
        w_w11=w_l1 + dw_l1,
    )


def flux_norms(fm: FluxModel, t: float, rho_max: float) -> NormBundle:
    """Flux norms over the slab ``[0, t] x domain x [0, rho_max]``.

    * ``f_sup        = sup V_max * sup |rho (1 - rho)|``
    * ``df_drho_sup  = sup V_max * sup |1 - 2 rho|``
    * ``dxf_sup      = sup |d_x V_max| * sup |rho (1 - rho)|``
    * ``dxf_drho_cross = sup |d_x V_max| * sup |1 - 2 rho|``
    * ``C = (1 + rho_max) * max(sup |d_x V_max|, sup |d_xx V_max|)``

    Speed-limit derivatives are centered finite differences on the grid; the
    result is non-decreasing in both ``t`` (more profiles enter the window)
    and ``rho_max``.
    """
    vmax_sup, d1, d2 = field_stats(fm, t)
    q = parabola_sup(rho_max)
    dq = parabola_slope_sup(rho_max)
    return NormBundle(
        f_sup=vmax_sup * q,
        df_drho_sup=vmax_sup * dq,
        dxf_sup=d1 * q,
        dxf_drho_cross=d1 * dq,
        C=(1.0 + rho_max) * max(d1, d2),
    )


def problem_norms(
    kernel: Kernel,
    velocity: VelocityLaw,
    flux: FluxModel,
    t: float,
    rho_max: float = 1.0,
    rho_ref: float = 1.0,
) -> NormBundle:
    """Complete norm bundle for one model instance at horizon ``t``."""
    v_sup, v_lip, v_second, v_w2inf = velocity_norms(velocity, rho_ref)
    vel = NormBundle(v_sup=v_sup, v_lip=v_lip, v_second=v_second, v_w2inf=v_w2inf)
    return vel.merged(kernel_norms(kernel)).merged(flux_norms(flux, t, rho_max))
