"""Tests for the a-priori bounds and stability estimates.

The headline checks run every estimate twice: once through the library
(mpmath arithmetic, invariant-region constants) and once through the
plain-float transcriptions in ``oracles.py`` fed with independently
assembled norm tables (closed-form kernel sups, scalar-loop L1 sums,
hand-derived velocity norms).  Constant speed limits keep all constants
at desk scale, so the float route never overflows and the two routes
must agree to near machine precision.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

import oracles
from conftest import grid_for, tame_problem
from nlwr import (
    BoundReport,
    ParameterError,
    PairMismatchError,
    VelocityLaw,
    build_kernel,
    discretization_error,
    empirical_stability_ratio,
    format_report,
    kernel_difference_w11,
    l1_distance,
    linf_bound,
    solve,
    stability_bound_kernel,
    stability_bound_velocity,
    tv_bound,
    velocity_difference_norms,
)
from nlwr.bounds import thread_count

# Norms of the velocity laws v(r) = (1-r)^(m-1) (1+r)^m over [0, 1],
# derived by hand:
#   m=1: v = 1+r            -> sup 2, |v'| = 1, v'' = 0, W2 sup 2
#   m=2: v = 1+r-r^2-r^3    -> sup v(1/3) = 32/27, |v'(1)| = 4,
#                              |v''(1)| = 8, W2 sup 8
_VELOCITY_NORMS = {
    1: dict(v_sup=2.0, v_lip=1.0, v_second=0.0, v_w2=2.0),
    2: dict(v_sup=32.0 / 27.0, v_lip=4.0, v_second=8.0, v_w2=8.0),
}


def scalar_norms(problem) -> dict:
    """Model norms for the float transcriptions, assembled independently.

    Kernel sup norms come from the closed forms, the L1 norms from scalar
    loops over closed-form samples, velocity norms from the hand-derived
    table above.  Only valid for constant speed limits (d1 = d2 = 0).
    """
    grid = problem.grid
    k = problem.kernel
    xs = [j * grid.dx for j in k.offsets]
    profiles = problem.flux.speed_limit.smoothed_profiles
    assert profiles.max() == profiles.min(), "helper expects a constant field"
    values = [float(v) for v in problem.rho0.values]
    return dict(
        rho_l1=oracles.l1_ref(values, grid.dx),
        rho_linf=max(abs(v) for v in values),
        tv0=oracles.tv_periodic_ref(values),
        vmax_sup=float(profiles.max()),
        d1=0.0,
        d2=0.0,
        w_l1=grid.dx * sum(abs(oracles.kernel_value(k.eta, k.delta, x)) for x in xs),
        w_linf=oracles.kernel_peak(k.eta),
        dw_l1=grid.dx * sum(abs(oracles.kernel_slope(k.eta, k.delta, x)) for x in xs),
        dw_linf=oracles.kernel_slope_peak(k.eta),
        ddw_linf=oracles.kernel_curvature_peak(k.eta),
        **_VELOCITY_NORMS[problem.velocity.m],
    )


def flat_problem(rho0: float = 0.2, **kw) -> "Problem":
    """Mild constant-datum instance whose constants stay O(1) at t = 0.1."""
    kw.setdefault("eta", 0.8)
    kw.setdefault("v0", 0.5)
    return tame_problem(dx=0.01, rho0=rho0, **kw)


def wavy_problem(dx: float = 0.01, **kw) -> "Problem":
    """Same mild regime with a smooth non-constant datum (real dynamics)."""
    grid = grid_for(dx)
    rho0 = 0.5 + 0.3 * np.sin(np.pi * grid.centers())
    kw.setdefault("eta", 0.8)
    kw.setdefault("v0", 0.5)
    return tame_problem(dx=dx, rho0=rho0, **kw)


# ---------------------------------------------------------------------------
# single-problem bounds
# ---------------------------------------------------------------------------


class TestLinfBound:
    def test_t_zero_equals_datum_sup(self):
        p = tame_problem(rho0=0.6)
        ceiling, rate = linf_bound(p, 0.0)
        assert float(ceiling) == 0.6
        assert rate > 0

    def test_zero_datum_freezes_everything(self):
        p = tame_problem(rho0=0.0)
        ceiling, rate = linf_bound(p, 0.4)
        assert rate == 0
        assert ceiling == 0

    def test_growth_rate_literal(self):
        # constant field: L = V_sup |v'|_inf |rho_0|_L1 |w'|_inf
        p = flat_problem()
        _, rate = linf_bound(p, 0.1)
        expected = 0.5 * 1.0 * 0.4 * oracles.kernel_slope_peak(0.8)
        assert float(rate) == pytest.approx(expected, rel=1e-12)

    def test_matches_float_transcription(self):
        p = flat_problem(m=2)
        ceiling, rate = linf_bound(p, 0.25)
        ref_m, ref_rate = oracles.linf_bound_float(scalar_norms(p), 0.25)
        assert float(rate) == pytest.approx(ref_rate, rel=1e-12)
        assert float(ceiling) == pytest.approx(ref_m, rel=1e-12)

    def test_monotone_in_time(self):
        p = flat_problem()
        ceilings = [linf_bound(p, t)[0] for t in (0.05, 0.1, 0.2)]
        assert ceilings[0] < ceilings[1] < ceilings[2]

    def test_dominates_baseline_run(self, baseline_problem, baseline_solution):
        ceiling, _ = linf_bound(baseline_problem, baseline_problem.config.T)
        observed = float(baseline_solution.snapshots.max())
        assert ceiling >= mp.mpf(observed)

    def test_negative_time_rejected(self):
        with pytest.raises(ParameterError):
            linf_bound(tame_problem(), -0.1)


class TestTvBound:
    def test_t_zero_equals_datum_tv(self):
        grid = grid_for(0.01)
        rho0 = np.where(np.abs(grid.centers()) < 0.5, 0.7, 0.3)
        p = tame_problem(rho0=rho0)
        _, _, envelope = tv_bound(p, 0.0)
        assert float(envelope) == oracles.tv_periodic_ref(rho0)

    def test_constant_field_kills_k1(self):
        k1, k2, envelope = tv_bound(flat_problem(), 0.3)
        assert k1 == 0
        assert k2 > 0
        assert envelope > 0  # constant datum: envelope = K2 t

    def test_matches_float_transcription(self):
        p = flat_problem(m=2)
        k1, k2, envelope = tv_bound(p, 0.25)
        ref_k1, ref_k2, ref_env = oracles.tv_bound_float(scalar_norms(p), 0.25)
        assert float(k1) == pytest.approx(ref_k1, abs=1e-14)
        assert float(k2) == pytest.approx(ref_k2, rel=1e-12)
        assert float(envelope) == pytest.approx(ref_env, rel=1e-12)

    def test_dominates_baseline_run(self, baseline_problem, baseline_solution):
        _, _, envelope = tv_bound(baseline_problem, baseline_problem.config.T)
        observed = max(baseline_solution.tv_history)
        assert envelope >= mp.mpf(float(observed))

    def test_negative_time_rejected(self):
        with pytest.raises(ParameterError):
            tv_bound(tame_problem(), -1e-9)


# ---------------------------------------------------------------------------
# pair differences
# ---------------------------------------------------------------------------


class TestKernelDifferenceW11:
    def test_identical_kernels_give_zero(self):
        k = build_kernel(0.5, 0.1, 0.01)
        assert kernel_difference_w11(k, k) == 0.0

    def test_symmetric(self):
        a = build_kernel(0.8, 0.0, 0.01)
        b = build_kernel(1.0, 0.05, 0.01)
        assert kernel_difference_w11(a, b) == kernel_difference_w11(b, a)

    def test_matches_quadrature_oracle(self):
        a = build_kernel(0.8, 0.0, 0.01)
        b = build_kernel(1.0, 0.05, 0.01)

        def diff(x):
            return abs(
                oracles.kernel_value(0.8, 0.0, x) - oracles.kernel_value(1.0, 0.05, x)
            )

        def diff_slope(x):
            return abs(
                oracles.kernel_slope(0.8, 0.0, x) - oracles.kernel_slope(1.0, 0.05, x)
            )

        breaks = [-1.0, -0.95, -0.8, 0.0, 0.05, 0.8, 1.05]
        ref = 0.0
        for fn in (diff, diff_slope):
            val, _ = integrate.quad(
                fn, breaks[0], breaks[-1], points=breaks[1:-1], limit=200
            )
            ref += val
        assert kernel_difference_w11(a, b) == pytest.approx(ref, rel=1e-4, abs=2e-5)

    def test_grows_with_shift(self):
        base = build_kernel(0.8, 0.0, 0.01)
        distances = [
            kernel_difference_w11(base, build_kernel(0.8, d, 0.01))
            for d in (0.02, 0.05, 0.1)
        ]
        assert distances[0] < distances[1] < distances[2]

    def test_invalid_refine_rejected(self):
        k = build_kernel(0.5, 0.0, 0.01)
        with pytest.raises(ParameterError):
            kernel_difference_w11(k, k, refine=0)


class TestVelocityDifferenceNorms:
    def test_m1_vs_m2_on_unit_interval(self):
        # v_1 - v_2 = r^2 + r^3: sup 2 at r = 1; (v_1 - v_2)' = 2r + 3r^2: sup 5
        dv, dv_prime = velocity_difference_norms(
            VelocityLaw(1), VelocityLaw(2), mp.mpf(1)
        )
        assert float(dv) == 2.0
        assert float(dv_prime) == 5.0

    def test_identical_laws_give_zero(self):
        dv, dv_prime = velocity_difference_norms(
            VelocityLaw(2), VelocityLaw(2), mp.mpf(1)
        )
        assert dv == 0
        assert dv_prime == 0

    def test_small_ceiling(self):
        dv, dv_prime = velocity_difference_norms(
            VelocityLaw(1), VelocityLaw(2), mp.mpf(0.5)
        )
        assert float(dv) == pytest.approx(0.5**2 + 0.5**3, rel=1e-14)
        assert float(dv_prime) == pytest.approx(2 * 0.5 + 3 * 0.5**2, rel=1e-14)

    def test_astronomical_ceiling_is_finite(self):
        ceiling = mp.mpf(10) ** 50
        dv, dv_prime = velocity_difference_norms(VelocityLaw(1), VelocityLaw(2), ceiling)
        assert mp.isfinite(dv) and dv > mp.mpf(10) ** 149  # ~ ceiling^3
        assert mp.isfinite(dv_prime) and dv_prime > mp.mpf(10) ** 99  # ~ 3 ceiling^2


# ---------------------------------------------------------------------------
# kernel/datum stability bound
# ---------------------------------------------------------------------------


class TestKernelStabilityBound:
    def pair(self):
        return flat_problem(), flat_problem(rho0=0.18, eta=1.0, delta=0.05)

    def test_matches_float_transcription(self):
        p, q = self.pair()
        report = stability_bound_kernel(p, q, 0.1)
        ref = oracles.kernel_bound_float(
            scalar_norms(p),
            scalar_norms(q),
            0.1,
            report.datum_distance,
            report.kernel_distance,
        )
        assert float(report.a_t) == pytest.approx(ref["a_t"], rel=1e-10)
        assert float(report.b_integral) == pytest.approx(ref["b_integral"], rel=1e-10)
        assert float(report.bound_value) == pytest.approx(ref["bound"], rel=1e-9)
        assert 0.0 < float(report.bound_value) < 10.0  # desk scale by design

    def test_t_zero_bound_is_datum_distance_exactly(self):
        p, q = self.pair()
        report = stability_bound_kernel(p, q, 0.0)
        assert report.a_t == 0
        assert report.b_integral == 0
        assert report.bound_value == mp.mpf(report.datum_distance)
        assert report.datum_distance == pytest.approx(0.04, rel=1e-12)

    def test_identical_problems_give_zero(self):
        p = flat_problem()
        report = stability_bound_kernel(p, p, 0.3)
        assert report.datum_distance == 0.0
        assert report.kernel_distance == 0.0
        assert report.bound_value == 0
        assert report.log_bound_value == mp.ninf
        assert report.dominates(0.0)

    def test_monotone_in_kernel_distance(self):
        # delta shifts change no kernel norm, only the W11 distance: the
        # coefficients a(t), b(s) must agree across the reports and the
        # bound must grow with the shift.
        base = flat_problem()
        reports = [
            stability_bound_kernel(base, flat_problem(delta=d), 0.1)
            for d in (0.02, 0.05, 0.1)
        ]
        assert reports[0].a_t == reports[1].a_t == reports[2].a_t
        assert reports[0].b_integral == reports[1].b_integral == reports[2].b_integral
        kd = [r.kernel_distance for r in reports]
        assert kd[0] < kd[1] < kd[2]
        bounds = [r.bound_value for r in reports]
        assert bounds[0] < bounds[1] < bounds[2]

    def test_coefficient_a_vanishes_at_zero_and_grows(self):
        p, q = self.pair()
        a_values = [stability_bound_kernel(p, q, t).a_t for t in (0.0, 0.05, 0.1, 0.2)]
        assert a_values[0] == 0
        assert a_values[0] < a_values[1] < a_values[2] < a_values[3]

    def test_quadrature_refinement_converges(self):
        p, q = self.pair()
        coarse = stability_bound_kernel(p, q, 0.1, nodes=256)
        fine = stability_bound_kernel(p, q, 0.1, nodes=512)
        assert float(fine.bound_value / coarse.bound_value - 1) == pytest.approx(
            0.0, abs=1e-3
        )

    def test_dominates_constant_datum_pair(self):
        # both solutions stay spatially constant, so the observed distance
        # is exactly the datum distance; the bound must cover it.
        p = flat_problem(T=0.1)
        q = flat_problem(rho0=0.18, eta=1.0, delta=0.05, T=0.1)
        distance = l1_distance(solve(p).final_state, solve(q).final_state)
        report = stability_bound_kernel(p, q, 0.1)
        assert distance == pytest.approx(report.datum_distance, rel=1e-12)
        assert report.dominates(distance)

    def test_dominates_observed_distance(self):
        p = wavy_problem(T=0.1)
        q = wavy_problem(T=0.1, delta=0.1)
        distance = l1_distance(solve(p).final_state, solve(q).final_state)
        report = stability_bound_kernel(p, q, 0.1)
        assert distance > 0.0
        assert report.dominates(distance)

    def test_mismatched_velocity_rejected(self):
        with pytest.raises(PairMismatchError):
            stability_bound_kernel(flat_problem(), flat_problem(m=2), 0.1)

    def test_mismatched_grid_rejected(self):
        with pytest.raises(PairMismatchError):
            stability_bound_kernel(
                flat_problem(), tame_problem(dx=0.02, eta=0.8, v0=0.5, rho0=0.2), 0.1
            )

    def test_mismatched_speed_limit_rejected(self):
        with pytest.raises(PairMismatchError):
            stability_bound_kernel(flat_problem(), flat_problem(v0=0.6), 0.1)

    def test_negative_time_rejected(self):
        p, q = self.pair()
        with pytest.raises(ParameterError):
            stability_bound_kernel(p, q, -0.1)

    def test_too_few_nodes_rejected(self):
        p, q = self.pair()
        with pytest.raises(ParameterError):
            stability_bound_kernel(p, q, 0.1, nodes=1)


# ---------------------------------------------------------------------------
# velocity stability bound
# ---------------------------------------------------------------------------


class TestVelocityStabilityBound:
    def pair(self):
        return flat_problem(), flat_problem(m=2)

    def test_matches_float_transcription(self):
        p, q = self.pair()
        report = stability_bound_velocity(p, q, 0.1)
        ref = oracles.velocity_bound_float(
            scalar_norms(p),
            scalar_norms(q),
            0.1,
            float(report.velocity_distance),
            float(report.velocity_deriv_distance),
        )
        assert float(report.c1) == pytest.approx(ref["c1"], rel=1e-10)
        assert float(report.c2) == pytest.approx(ref["c2"], rel=1e-10)
        assert float(report.c3_integral) == pytest.approx(ref["c3_integral"], rel=1e-10)
        assert float(report.bound_value) == pytest.approx(ref["bound"], rel=1e-9)
        assert 0.0 < float(report.bound_value) < 10.0

    def test_velocity_norms_taken_at_growth_ceiling(self):
        # v_1 - v_2 = r^2 + r^3 is increasing, so both sups sit at the
        # ceiling M_t reported alongside the bound.
        p, q = self.pair()
        report = stability_bound_velocity(p, q, 0.1)
        g = report.m_t
        assert float(report.velocity_distance) == pytest.approx(
            float(g**2 + g**3), rel=1e-12
        )
        assert float(report.velocity_deriv_distance) == pytest.approx(
            float(2 * g + 3 * g**2), rel=1e-12
        )

    def test_same_law_gives_zero(self):
        p = flat_problem()
        q = flat_problem()
        report = stability_bound_velocity(p, q, 0.2)
        assert report.velocity_distance == 0
        assert report.bound_value == 0
        assert report.log_bound_value == mp.ninf

    def test_t_zero_gives_zero(self):
        p, q = self.pair()
        report = stability_bound_velocity(p, q, 0.0)
        assert report.c1 == 0
        assert report.c2 == 0
        assert report.c3_integral == 0
        assert report.bound_value == 0

    def test_coefficients_vanish_at_zero_and_grow(self):
        p, q = self.pair()
        reports = [stability_bound_velocity(p, q, t) for t in (0.05, 0.1, 0.2)]
        assert reports[0].c1 < reports[1].c1 < reports[2].c1
        assert reports[0].c2 < reports[1].c2 < reports[2].c2

    def test_quadrature_refinement_converges(self):
        p, q = self.pair()
        coarse = stability_bound_velocity(p, q, 0.1, nodes=256)
        fine = stability_bound_velocity(p, q, 0.1, nodes=512)
        assert float(fine.bound_value / coarse.bound_value - 1) == pytest.approx(
            0.0, abs=1e-3
        )

    def test_dominates_observed_distance(self):
        p = wavy_problem(T=0.1)
        q = wavy_problem(T=0.1, m=2)
        distance = l1_distance(solve(p).final_state, solve(q).final_state)
        report = stability_bound_velocity(p, q, 0.1)
        assert distance > 0.0
        assert report.dominates(distance)

    def test_mismatched_kernel_rejected(self):
        with pytest.raises(PairMismatchError):
            stability_bound_velocity(flat_problem(), flat_problem(m=2, eta=1.0), 0.1)

    def test_mismatched_datum_rejected(self):
        with pytest.raises(PairMismatchError):
            stability_bound_velocity(flat_problem(), flat_problem(m=2, rho0=0.25), 0.1)

    def test_negative_time_rejected(self):
        p, q = self.pair()
        with pytest.raises(ParameterError):
            stability_bound_velocity(p, q, -0.1)

    def test_too_few_nodes_rejected(self):
        p, q = self.pair()
        with pytest.raises(ParameterError):
            stability_bound_velocity(p, q, 0.1, nodes=0)


# ---------------------------------------------------------------------------
# empirical comparison
# ---------------------------------------------------------------------------


class TestEmpiricalStabilityRatio:
    def rows(self):
        base = wavy_problem()
        pairs = [(base, wavy_problem(delta=d)) for d in (0.1, 0.05, 0.02)]
        pairs.append((base, wavy_problem()))  # identical: zero perturbation
        pairs.append((base, wavy_problem(m=2)))  # velocity perturbation
        return empirical_stability_ratio(pairs, 0.1)

    def test_rows_sorted_and_classified(self):
        rows = self.rows()
        assert len(rows) == 5
        perturbations = [row.perturbation for row in rows]
        assert perturbations == sorted(perturbations)
        assert [row.kind for row in rows] == ["kernel"] * 4 + ["velocity"]
        # velocity perturbation size is |v - v~|_inf + |v' - v~'|_inf on [0, 1]
        assert rows[-1].perturbation == pytest.approx(7.0, rel=1e-12)

    def test_zero_perturbation_row(self):
        row = self.rows()[0]
        assert row.perturbation == 0.0
        assert row.distance == 0.0
        assert row.ratio == 0.0
        assert row.bound_holds

    def test_each_bound_covers_its_distance(self):
        for row in self.rows():
            assert row.distance >= 0.0
            assert row.bound_holds
            if row.perturbation > 0.0:
                assert row.ratio == row.distance / row.perturbation

    def test_distance_shrinks_with_perturbation(self):
        kernel_rows = [r for r in self.rows() if r.kind == "kernel" and r.perturbation]
        assert kernel_rows[0].distance <= kernel_rows[-1].distance
        assert all(row.distance > 0.0 for row in kernel_rows)

    def test_deterministic_under_thread_cap(self, monkeypatch):
        serial = self.rows()
        monkeypatch.setenv("NLWR_THREADS", "2")
        threaded = self.rows()
        assert [r.distance for r in serial] == [r.distance for r in threaded]


class TestDiscretizationError:
    def test_shrinks_with_grid_step(self):
        def make(dx: float):
            return wavy_problem(dx=dx, T=0.1)

        coarse = discretization_error(make, 0.04)
        fine = discretization_error(make, 0.02)
        assert 0.0 < fine < coarse


class TestThreadCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("NLWR_THREADS", "3")
        assert thread_count() == 3

    def test_default_is_positive(self, monkeypatch):
        monkeypatch.delenv("NLWR_THREADS", raising=False)
        assert thread_count() >= 1

    def test_rejects_non_integer(self, monkeypatch):
        monkeypatch.setenv("NLWR_THREADS", "many")
        with pytest.raises(ParameterError):
            thread_count()

    def test_rejects_non_positive(self, monkeypatch):
        monkeypatch.setenv("NLWR_THREADS", "0")
        with pytest.raises(ParameterError):
            thread_count()


# ---------------------------------------------------------------------------
# report presentation
# ---------------------------------------------------------------------------


def _toy_report(**overrides) -> BoundReport:
    fields = dict(
        kind="kernel",
        t=0.1,
        script_l=mp.mpf(1),
        m_t=mp.mpf(1),
        k1=mp.mpf(0),
        k2=mp.mpf(1),
        tv_bound=mp.mpf(1),
        a_t=mp.mpf(0.5),
        b_integral=mp.mpf(0.25),
        datum_distance=0.01,
        kernel_distance=0.02,
        log_bound_value=mp.log(mp.mpf(10)),
        bound_value=mp.mpf(10),
    )
    fields.update(overrides)
    return BoundReport(**fields)


class TestBoundReport:
    def test_dominates_in_log_space(self):
        report = _toy_report()
        assert report.dominates(5.0)
        assert report.dominates(10.0)
        assert not report.dominates(10.5)
        assert report.dominates(10.5, slack=1.0)
        assert report.dominates(0.0)
        assert report.dominates(-1.0)

    def test_zero_bound_dominates_only_zero(self):
        report = _toy_report(log_bound_value=mp.ninf, bound_value=mp.mpf(0))
        assert report.dominates(0.0)
        assert not report.dominates(1e-300)

    def test_overflow_sentinel_still_ranks(self):
        report = _toy_report(log_bound_value=mp.mpf(2e6), bound_value=mp.inf)
        assert report.dominates(1e300)


class TestFormatReport:
    def test_kernel_block(self):
        p = flat_problem()
        q = flat_problem(delta=0.05)
        text = format_report(stability_bound_kernel(p, q, 0.1), empirical=0.001)
        assert "kernel perturbation" in text
        assert "a(t)" in text
        assert "|w - w~|_W11" in text
        assert "empirical distance" in text
        assert "bound >= empirical   : True" in text

    def test_velocity_block(self):
        p, q = flat_problem(), flat_problem(m=2)
        text = format_report(stability_bound_velocity(p, q, 0.1))
        assert "velocity perturbation" in text
        assert "c1(t)" in text
        assert "|v - v~|_inf" in text
        assert "empirical" not in text

    def test_overflow_sentinel_rendering(self):
        text = format_report(
            _toy_report(log_bound_value=mp.mpf(2e6), bound_value=mp.inf)
        )
        assert "inf (overflow sentinel)" in text

    def test_astronomical_constant_rendering(self):
        text = format_report(_toy_report(m_t=mp.exp(mp.mpf(1e7))))
        assert "10^(" in text

    def test_zero_bound_rendering(self):
        text = format_report(
            _toy_report(log_bound_value=mp.ninf, bound_value=mp.mpf(0))
        )
        assert "-inf" in text
