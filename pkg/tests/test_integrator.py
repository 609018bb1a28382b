import math

import numpy as np
import pytest

from symorbit import (
    DomainExit,
    ForceField,
    IntegratorConfig,
    PowerLawParams,
    angular_momentum,
    circular_speed,
    energy,
    flow,
    flow_with_reflection_check,
)

from oracles import kepler_period, semi_major_axis


def launch_state(sigma, params, radius=1.0):
    return np.array([radius, 0.0]), np.array([0.0, sigma * circular_speed(params, radius)])


class TestFlow:
    def test_circular_orbit_stays_circular(self, kepler_field, kepler_params):
        x, v = launch_state(1.0, kepler_params)
        traj = flow(kepler_field, 0.0, x, v, 2 * math.pi)
        _, states = traj.sample(512)
        radii = np.hypot(states[:, 0], states[:, 1])
        assert np.max(np.abs(radii - 1.0)) < 1e-8

    def test_energy_drift_one_radial_period(self, kepler_field, kepler_params):
        # sigma = 1.1 ellipse over one full radial period
        from symorbit import State

        cfg = IntegratorConfig()
        x, v = launch_state(1.1, kepler_params)
        period = kepler_period(semi_major_axis(1.0, 1.1, 1.0), 1.0)
        traj = flow(kepler_field, 0.0, x, v, period, cfg)
        h = [
            energy(kepler_params, traj.interpolate(t))
            for t in np.linspace(0, period, 400)
        ]
        drift = np.max(np.abs(np.array(h) - h[0])) / abs(h[0])
        assert drift < 1e-9
        # The propagated (node) solution meets the tighter 10*rel_tol bound;
        # dense samples add quartic-interpolant error on top.
        h_nodes = [
            energy(kepler_params, State(t=t, position=y[:2], velocity=y[2:]))
            for t, y in zip(traj.ts, traj.ys)
        ]
        node_drift = np.max(np.abs(np.array(h_nodes) - h_nodes[0])) / abs(h_nodes[0])
        assert node_drift < 10 * cfg.rel_tol

    def test_angular_momentum_drift(self, kepler_radial_field, kepler_params):
        # Central perturbation: K stays conserved for mu != 0 as well.
        cfg = IntegratorConfig()
        x, v = launch_state(1.05, kepler_params)
        for mu in (0.0, 0.1):
            traj = flow(kepler_radial_field, mu, x, v, 2 * math.pi, cfg)
            ks = [
                angular_momentum(traj.interpolate(t))
                for t in np.linspace(0, 2 * math.pi, 200)
            ]
            drift = np.max(np.abs(np.array(ks) - ks[0])) / abs(ks[0])
            assert drift < 10 * cfg.rel_tol

    def test_escape_raises_domain_exit(self, kepler_field):
        # Speed 2 exceeds escape speed sqrt(2); the orbit must hit the outer radius.
        with pytest.raises(DomainExit) as err:
            flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 2.0), 20.0)
        exc = err.value
        assert exc.t_exit is not None and 0 < exc.t_exit < 20.0
        assert np.hypot(*exc.state.position) == pytest.approx(2.0, abs=1e-9)
        assert exc.trajectory is not None
        assert exc.trajectory.t_end == pytest.approx(exc.t_exit)

    def test_inward_plunge_hits_guard(self, kepler_field):
        with pytest.raises(DomainExit) as err:
            flow(kepler_field, 0.0, (1.0, 0.0), (-0.8, 0.0), 10.0)
        assert np.hypot(*err.value.state.position) == pytest.approx(0.5, abs=1e-9)

    def test_initial_point_outside_annulus(self, kepler_field):
        with pytest.raises(DomainExit):
            flow(kepler_field, 0.0, (2.5, 0.0), (0.0, 1.0), 1.0)

    def test_convergence_order(self, kepler_field, kepler_params):
        # Fixed-step mode (huge tolerances, pinned step): the closure error of
        # a known ellipse over one period must scale with the method order.
        x, v = launch_state(1.1, kepler_params)
        period = kepler_period(semi_major_axis(1.0, 1.1, 1.0), 1.0)
        errors = []
        steps = [period / 64, period / 128, period / 256, period / 512]
        for h in steps:
            cfg = IntegratorConfig(rel_tol=1e6, abs_tol=1e6, max_step=h, first_step=h)
            traj = flow(kepler_field, 0.0, x, v, period, cfg)
            errors.append(np.linalg.norm(traj.final_state().position - x))
        slopes = [
            math.log2(e0 / e1) for e0, e1 in zip(errors[:-1], errors[1:])
        ]
        mean_slope = sum(slopes) / len(slopes)
        assert 4.5 < mean_slope < 5.5

    def test_tolerance_halving_shrinks_closure(self, kepler_field, kepler_params):
        x, v = launch_state(1.1, kepler_params)
        period = kepler_period(semi_major_axis(1.0, 1.1, 1.0), 1.0)
        errs = []
        for tol in (1e-8, 1e-10, 1e-12):
            cfg = IntegratorConfig(rel_tol=tol, abs_tol=tol)
            traj = flow(kepler_field, 0.0, x, v, period, cfg)
            errs.append(np.linalg.norm(traj.final_state().position - x))
        assert errs[0] > errs[1] > errs[2]


class TestDenseOutput:
    def test_nodes_reproduced(self, kepler_field):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.05), 3.0)
        for i in range(0, len(traj.ts), 7):
            st = traj.interpolate(traj.ts[i])
            assert np.allclose(
                np.concatenate([st.position, st.velocity]), traj.ys[i], atol=1e-12
            )

    def test_matches_independent_integrator(self, kepler_radial_field):
        # Cross-check the dense solution against scipy's DOP853 on a
        # perturbed field; both should agree far below the event tolerances.
        solve_ivp = pytest.importorskip("scipy.integrate").solve_ivp
        mu = 0.07

        def rhs(t, y):
            ax, ay = kepler_radial_field.acceleration(y[0], y[1], mu)
            return [y[2], y[3], ax, ay]

        t_end = 5.0
        ref = solve_ivp(
            rhs,
            (0.0, t_end),
            [1.0, 0.0, 0.0, 1.02],
            method="DOP853",
            rtol=1e-12,
            atol=1e-12,
            dense_output=True,
        )
        traj = flow(kepler_radial_field, mu, (1.0, 0.0), (0.0, 1.02), t_end)
        worst = 0.0
        for t in np.linspace(0.0, t_end, 200):
            mine = traj.interpolate(t).position
            theirs = ref.sol(t)[:2]
            worst = max(worst, float(np.linalg.norm(mine - theirs)))
        assert worst < 1e-8

    def test_interpolation_continuity_across_steps(self, kepler_field):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.05), 3.0)
        for t_node in traj.ts[1:-1][::5]:
            left = traj._eval(np.nextafter(t_node, -np.inf))
            right = traj._eval(np.nextafter(t_node, np.inf))
            assert np.allclose(left, right, atol=1e-11)

    def test_truncated(self, kepler_field):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.0), 4.0)
        cut = traj.truncated(1.7)
        assert cut.t_end == pytest.approx(1.7)
        full = traj.interpolate(1.3)
        part = cut.interpolate(1.3)
        assert np.allclose(full.position, part.position)
        assert np.allclose(
            cut.final_state().position, traj.interpolate(1.7).position
        )

    def test_csv_export(self, kepler_field, tmp_path):
        traj = flow(kepler_field, 0.0, (1.0, 0.0), (0.0, 1.0), 1.0)
        path = tmp_path / "traj.csv"
        traj.write_csv(path, n_samples=16)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,x,y,vx,vy"
        assert len(lines) == 17
        first = [float(v) for v in lines[1].split(",")]
        assert first == [0.0, 1.0, 0.0, 0.0, 1.0]


class TestReflectionCheck:
    def test_circle_exact_symmetry(self, kepler_field):
        _, res = flow_with_reflection_check(
            kepler_field, 0.0, (1.0, 0.0), (0.0, 1.0), 6.0
        )
        assert res <= 1e-10

    def test_x_only_symmetric_field(self, half_field_a05):
        _, res = flow_with_reflection_check(
            half_field_a05, 0.03, (1.0, 0.0), (0.0, 1.0), 5.0
        )
        assert res <= 1e-8

    def test_broken_symmetry_visible(self):
        from symorbit import PerturbationSpec

        broken = PerturbationSpec(
            kind="uniform", params={"ux": 0.0, "uy": 0.05}, declared_symmetries={"x_axis"}
        )
        f = ForceField(base=PowerLawParams(1.0, 1.0), perturbation=broken, mu_range=2.0)
        _, res = flow_with_reflection_check(f, 1.0, (1.0, 0.0), (0.0, 1.0), 5.0)
        # Deviation driven by the 0.05-magnitude asymmetric term.
        assert res > 1e-2

    def test_rejects_bad_launch(self, kepler_field):
        with pytest.raises(ValueError):
            flow_with_reflection_check(kepler_field, 0.0, (1.0, 0.1), (0.0, 1.0), 1.0)
        with pytest.raises(ValueError):
            flow_with_reflection_check(kepler_field, 0.0, (1.0, 0.0), (0.3, 1.0), 1.0)
