import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symorbit import (
    ApsisKind,
    DegenerateLimit,
    NoBoundedMotion,
    PowerLawParams,
    State,
    angular_momentum,
    apsidal_angle,
    apsidal_limit,
    apsides,
    circular_speed,
    effective_potential,
    energy,
    flow,
    potential_derivatives,
    radial_accel_at_launch,
    radial_problem_from_launch,
    turning_radii,
)
from symorbit.analysis import radial_accel_finite_difference

from oracles import apsidal_limit_power_law, kepler_apsis_radii


def mkstate(px, py, vx, vy):
    return State(t=0.0, position=np.array([px, py]), velocity=np.array([vx, vy]))


class TestConservedQuantities:
    def test_circle_state(self, kepler_params):
        st_ = mkstate(1.0, 0.0, 0.0, 1.0)
        assert angular_momentum(st_) == 1.0
        assert energy(kepler_params, st_) == pytest.approx(-0.5)

    def test_reflection_flips_momentum_keeps_energy(self, kepler_params):
        st_up = mkstate(1.0, 0.0, 0.0, 1.0)
        st_dn = mkstate(1.0, 0.0, 0.0, -1.0)
        assert angular_momentum(st_dn) == -angular_momentum(st_up)
        assert energy(kepler_params, st_dn) == energy(kepler_params, st_up)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.3, 3.0),
        st.floats(0.0, 2 * math.pi),
        st.floats(-2.0, 2.0),
        st.floats(-2.0, 2.0),
    )
    def test_momentum_is_cross_product(self, r, ang, vx, vy):
        s = mkstate(r * math.cos(ang), r * math.sin(ang), vx, vy)
        expected = s.position[0] * vy - s.position[1] * vx
        assert angular_momentum(s) == pytest.approx(expected, rel=1e-12, abs=1e-300)


class TestEffectivePotential:
    def test_value(self, kepler_params):
        assert effective_potential(kepler_params, 1.0, 1.0) == pytest.approx(-0.5)

    def test_zero_momentum_reduces_to_potential(self, kepler_params):
        from symorbit import potential

        assert effective_potential(kepler_params, 0.0, 1.7) == potential(
            kepler_params, 1.7
        )

    def test_minimum_at_circular_radius(self, kepler_params):
        # Calculus oracle: d/dr (1/2r^2 - 1/r) vanishes at r = 1 for K = 1.
        vals = [effective_potential(kepler_params, 1.0, r) for r in (0.99, 1.0, 1.01)]
        assert vals[1] < vals[0] and vals[1] < vals[2]


class TestTurningRadii:
    def test_circular_double_root(self, kepler_params):
        v = circular_speed(kepler_params, 1.0)
        E = 0.5 * v * v + (-1.0)
        r_min, r_max = turning_radii(kepler_params, E, 1.0 * v)
        assert r_min == pytest.approx(r_max)
        assert r_min == pytest.approx(1.0, rel=1e-10)

    def test_kepler_ellipse_conic_oracle(self, kepler_params):
        lo, hi = kepler_apsis_radii(1.0, 1.1)
        problem = radial_problem_from_launch(kepler_params, 1.0, 1.1)
        assert problem.r_min == pytest.approx(lo, rel=1e-10)
        assert problem.r_max == pytest.approx(hi, rel=1e-10)
        # generic solver agrees with the launch-anchored construction
        r_min, r_max = turning_radii(kepler_params, problem.E, problem.K)
        assert r_min == pytest.approx(lo, rel=1e-9)
        assert r_max == pytest.approx(hi, rel=1e-9)

    def test_slow_launch_swaps_roles(self, kepler_params):
        lo, hi = kepler_apsis_radii(1.0, 0.9)
        problem = radial_problem_from_launch(kepler_params, 1.0, 0.9)
        assert problem.r_max == pytest.approx(1.0)
        assert problem.r_min == pytest.approx(lo, rel=1e-10)

    def test_steep_force_unbounded(self):
        params = PowerLawParams(1.0, 3.0)
        with pytest.raises(NoBoundedMotion):
            radial_problem_from_launch(params, 1.0, 1.02)
        v = 1.02 * circular_speed(params, 1.0)
        E = 0.5 * v * v + (-1.0 / 3.0)
        with pytest.raises(NoBoundedMotion):
            turning_radii(params, E, v)

    def test_nonnegative_energy_unbounded(self):
        params = PowerLawParams(1.0, 0.5)
        with pytest.raises(NoBoundedMotion):
            turning_radii(params, 0.1, 1.0)

    def test_zero_momentum_rejected(self, kepler_params):
        with pytest.raises(NoBoundedMotion):
            turning_radii(kepler_params, -0.5, 0.0)


class TestApsides:
    def test_circle_is_empty(self, kepler_field):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.0), 2 * math.pi)
        assert apsides(traj) == []

    def test_kepler_ellipse_alternation(self, kepler_field):
        lo, hi = kepler_apsis_radii(1.0, 1.1)
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.1), 14.0)
        events = apsides(traj)
        assert len(events) >= 3
        kinds = [e.kind for e in events]
        assert kinds[0] == ApsisKind.PERICENTER  # fast launch starts at the low point
        assert all(a != b for a, b in zip(kinds, kinds[1:]))
        for e in events:
            target = lo if e.kind is ApsisKind.PERICENTER else hi
            assert e.r == pytest.approx(target, abs=1e-8)

    def test_slow_launch_starts_at_apocenter(self, kepler_field):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 0.95), 10.0)
        events = apsides(traj)
        assert events[0].kind == ApsisKind.APOCENTER
        assert events[0].t == 0.0

    def test_soft_force_launch_pericenter(self):
        # epsilon > 0 launch point is a radius minimum.
        params = PowerLawParams(1.0, 0.5)
        field_ = __import__("symorbit").ForceField(base=params)
        traj = flow(field_, 0.0, (1.0, 0.0), (0.0, 1.05 * circular_speed(params, 1.0)), 8.0)
        events = apsides(traj)
        assert events[0].kind == ApsisKind.PERICENTER


class TestApsidalAngle:
    def test_kepler_is_pi(self, kepler_params):
        for sigma in (1.05, 1.1, 1.2, 0.9):
            problem = radial_problem_from_launch(kepler_params, 1.0, sigma)
            assert apsidal_angle(problem) == pytest.approx(math.pi, abs=1e-8)

    def test_matches_scipy_quadrature(self, kepler_params):
        # Independent oracle: adaptive quadrature of the raw integrand with
        # endpoint weights handled by points splitting.
        quad = pytest.importorskip("scipy.integrate").quad
        problem = radial_problem_from_launch(PowerLawParams(1.3, 0.5), 1.2, 1.07)
        K, E, params = abs(problem.K), problem.E, problem.params

        def integrand(r):
            f2 = 2.0 * (E - effective_potential(params, K, r))
            return (K / r**2) / math.sqrt(max(f2, 1e-300))

        ref, err = quad(
            integrand,
            problem.r_min,
            problem.r_max,
            points=[problem.r_min, problem.r_max],
            limit=200,
        )
        assert apsidal_angle(problem) == pytest.approx(ref, abs=max(1e-7, 10 * err))

    def test_matches_trajectory_angle(self, kepler_params):
        # Dual route: polar angle swept between consecutive apsides of an
        # actual integrated orbit equals the quadrature value.
        params = PowerLawParams(1.0, 0.5)
        field_ = __import__("symorbit").ForceField(base=params)
        sigma = 1.04
        traj = flow(field_, 0.0, (1.0, 0.0), (0.0, sigma * circular_speed(params, 1.0)), 12.0)
        events = apsides(traj)
        assert len(events) >= 3
        problem = radial_problem_from_launch(params, 1.0, sigma)
        phi = apsidal_angle(problem)
        angles = []
        for e in events:
            s = traj.interpolate(e.t)
            angles.append(math.atan2(s.position[1], s.position[0]))
        unwrapped = np.unwrap(angles)
        advances = np.abs(np.diff(unwrapped))
        assert np.allclose(advances, phi, atol=1e-6)
        # equal advance between every consecutive apsis pair
        assert np.max(advances) - np.min(advances) < 1e-6

    def test_circular_degenerate_returns_limit(self, kepler_params):
        problem = radial_problem_from_launch(kepler_params, 1.0, 1.0)
        assert apsidal_angle(problem) == apsidal_limit(kepler_params, 1.0)

    def test_near_circular_limit_values(self):
        for alpha in (0.0, 0.5, 1.5):
            params = PowerLawParams(1.0, alpha)
            problem = radial_problem_from_launch(params, 1.0, 1.001)
            assert apsidal_angle(problem) == pytest.approx(
                apsidal_limit_power_law(alpha), abs=1e-3
            )

    def test_convergence_to_limit(self):
        # Error decreasing through eps = 1e-2, 1e-3, 1e-4 and below 10*eps.
        for alpha in (0.0, 0.5, 1.5):
            params = PowerLawParams(1.0, alpha)
            lim = apsidal_limit(params, 1.0)
            errs = []
            for eps in (1e-2, 1e-3, 1e-4):
                problem = radial_problem_from_launch(params, 1.0, 1.0 + eps)
                errs.append(abs(apsidal_angle(problem) - lim))
            assert errs[0] > errs[1] > errs[2]
            assert all(e < 10 * eps for e, eps in zip(errs, (1e-2, 1e-3, 1e-4)))


class TestApsidalLimit:
    def test_values(self):
        assert apsidal_limit(PowerLawParams(1.0, 1.0), 1.0) == pytest.approx(math.pi)
        assert apsidal_limit(PowerLawParams(1.0, 0.0), 1.0) == pytest.approx(
            math.pi / math.sqrt(2)
        )

    def test_degenerate_at_alpha_two(self):
        with pytest.raises(DegenerateLimit):
            apsidal_limit(PowerLawParams(1.0, 2.0), 1.0)
        with pytest.raises(DegenerateLimit):
            apsidal_limit(PowerLawParams(1.0, 2.7), 1.0)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(0.1, 10.0), st.floats(0.0, 1.99), st.floats(0.1, 10.0))
    def test_closed_form_simplification(self, kappa, alpha, r0):
        # pi sqrt(U'/(3U' + r U'')) collapses to pi/sqrt(2 - alpha) for the
        # power-law family, independent of kappa and r0.
        got = apsidal_limit(PowerLawParams(kappa, alpha), r0)
        assert got == pytest.approx(apsidal_limit_power_law(alpha), rel=1e-12)


class TestLaunchRadialAcceleration:
    def test_zero_at_circular(self, kepler_params):
        assert radial_accel_at_launch(kepler_params, 1.0, 0.0) == 0.0

    def test_formula_value(self, kepler_params):
        assert radial_accel_at_launch(kepler_params, 1.0, 0.1) == pytest.approx(0.21)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("eps", [0.1, -0.1, 0.01, -0.01])
    def test_finite_difference_match(self, alpha, eps):
        params = PowerLawParams(1.0, alpha)
        fd = radial_accel_finite_difference(params, 1.0, eps)
        assert abs(fd - radial_accel_at_launch(params, 1.0, eps)) < 1e-5

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 3.0), st.sampled_from([0.15, 0.03, -0.03, -0.15]))
    def test_sign_matches_epsilon(self, alpha, eps):
        params = PowerLawParams(1.0, alpha)
        val = radial_accel_at_launch(params, 1.0, eps)
        assert math.copysign(1.0, val) == math.copysign(1.0, eps)

    def test_scales_with_potential_slope(self):
        # eps(2+eps)U'(a) with U'(a) = kappa a^-(alpha+1)
        params = PowerLawParams(2.0, 0.5)
        u1, _ = potential_derivatives(params, 1.5)
        assert radial_accel_at_launch(params, 1.5, 0.05) == pytest.approx(
            0.05 * 2.05 * u1
        )


class TestAngularMonotonicity:
    def test_orbit_keeps_circling(self, kepler_field):
        # Between apsides the polar angle keeps advancing: total angle over
        # several radial periods exceeds the per-apsis advance times the count.
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.1), 25.0)
        ts = np.linspace(0.0, 25.0, 2000)
        ang = np.unwrap(
            [math.atan2(*traj.interpolate(t).position[::-1]) for t in ts]
        )
        dphi = np.diff(ang)
        assert np.all(dphi > 0)
        events = apsides(traj)
        assert ang[-1] - ang[0] > (len(events) - 1) * math.pi * 0.9
