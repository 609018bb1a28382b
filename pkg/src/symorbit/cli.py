"""Command-line front end: solve, sweep, analyze, verify.

All commands read one JSON configuration file, take a few numeric overrides on
the command line, and emit deterministic machine-readable output (JSON and
CSV, floats at 17 significant digits). Exit codes classify failures: 2 for
bracketing, 3 for bisection convergence, 4 for validation, 5 for leaving the
problem's domain of validity, 1 for configuration problems.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import serialize
from .analysis import (
    apsidal_angle,
    apsidal_limit,
    apsides,
    energy,
    angular_momentum,
    radial_accel_at_launch,
    radial_accel_finite_difference,
    radial_problem_from_launch,
)
from .continuation import sweep as run_sweep, zero_set_scan
from .errors import (
    BoundaryHypothesisFailure,
    BracketFailure,
    DegenerateLimit,
    DomainExit,
    HypothesisViolation,
    NoBoundedMotion,
    NoCrossing,
    NonConvergence,
    SolverError,
    StepFailure,
    SymmetryViolation,
    TangentialCrossing,
    BoundaryCrossing,
)
from .forcefield import (
    ForceField,
    PowerLawParams,
    check_symmetry,
    circular_speed,
    field_from_config,
)
from .integrator import IntegratorConfig, flow
from .orbit import extend_half, extend_quarter, validate_orbit
from .shooting import (
    Mode,
    ShootingProblem,
    crossing_time_deviation,
    sign_table,
    solve as run_solve,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BRACKET = 2
EXIT_CONVERGENCE = 3
EXIT_VALIDATION = 4
EXIT_DOMAIN = 5

_EXIT_BY_ERROR = (
    (BracketFailure, EXIT_BRACKET),
    (NonConvergence, EXIT_CONVERGENCE),
    ((SymmetryViolation, HypothesisViolation), EXIT_VALIDATION),
    (
        (
            DomainExit,
            StepFailure,
            NoCrossing,
            TangentialCrossing,
            BoundaryCrossing,
            NoBoundedMotion,
            DegenerateLimit,
            BoundaryHypothesisFailure,
        ),
        EXIT_DOMAIN,
    ),
)


def exit_code_for(exc: SolverError) -> int:
    for types_, code in _EXIT_BY_ERROR:
        if isinstance(exc, types_):
            return code
    return EXIT_VALIDATION


@dataclass
class RunConfig:
    field: ForceField
    mode: Mode
    radius: float
    eta: float
    delta: float
    solve_tol: float
    t_bar: float | None
    integrator: IntegratorConfig
    mu: float
    mu_grid: dict
    scan: dict
    samples: int
    seed: int
    symmetry_samples: int

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        field = field_from_config(raw["field"])
        icfg = raw.get("integrator", {})
        integrator = IntegratorConfig(
            rel_tol=float(icfg.get("rel_tol", 1e-12)),
            abs_tol=float(icfg.get("abs_tol", 1e-12)),
            max_step=icfg.get("max_step"),
            first_step=icfg.get("first_step"),
        )
        return cls(
            field=field,
            mode=Mode(raw.get("mode", "quarter")),
            radius=float(raw.get("radius", 1.0)),
            eta=float(raw.get("eta", 0.1)),
            delta=float(raw.get("delta", 0.2)),
            solve_tol=float(raw.get("solve_tol", 1e-10)),
            t_bar=raw.get("t_bar"),
            integrator=integrator,
            mu=float(raw.get("mu", 0.0)),
            mu_grid=dict(raw.get("mu_grid", {})),
            scan=dict(
                raw.get(
                    "scan",
                    {"sigma_min": 0.9, "sigma_max": 1.1, "sigma_count": 41, "mu_max": 0.05, "mu_count": 21},
                )
            ),
            samples=int(raw.get("samples", 1024)),
            seed=int(raw.get("seed", 0)),
            symmetry_samples=int(raw.get("symmetry_samples", 64)),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        import json

        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def problem(self) -> ShootingProblem:
        return ShootingProblem(
            field=self.field,
            radius=self.radius,
            mode=self.mode,
            eta=self.eta,
            delta=self.delta,
            t_bar=self.t_bar,
            integrator=self.integrator,
        )


def _emit(payload: dict, as_json: bool, stream=None):
    stream = stream or sys.stdout
    if as_json:
        stream.write(serialize.dumps(payload) + "\n")
    else:
        for key, value in payload.items():
            if key == "samples":
                continue
            stream.write(f"{key}: {value}\n")


def cmd_solve(config: RunConfig, mu: float, out_dir, as_json: bool) -> int:
    check_symmetry(
        config.field, mu, sample_count=config.symmetry_samples, seed=config.seed
    )
    problem = config.problem()
    solution = run_solve(problem, mu, tol=config.solve_tol)
    extend = extend_quarter if config.mode is Mode.QUARTER else extend_half
    orbit = extend(solution.segment, mu=mu, n_samples=config.samples)
    ok, diag = validate_orbit(orbit, config.field, mu, config.integrator)

    payload = orbit.to_dict(include_samples=True)
    payload["sigma_star"] = solution.sigma_star
    payload["tau"] = solution.tau
    payload["miss_residual"] = solution.miss_residual
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        serialize.dump(payload, out / "orbit.json")
        orbit.write_csv(out / "orbit.csv")
    summary = {k: v for k, v in payload.items() if k != "samples"}
    _emit(summary, as_json)
    return EXIT_OK if ok else EXIT_VALIDATION


def _mu_grids(config: RunConfig):
    # Default sweep range: 64 uniform points over [0, half the mu range].
    stop = float(config.mu_grid.get("stop", 0.5 * config.field.mu_range))
    if stop <= 0:
        raise ValueError("mu_grid stop must be positive")
    if "step" in config.mu_grid:
        step = float(config.mu_grid["step"])
        if step <= 0:
            raise ValueError("mu_grid step must be positive")
        n = int(round(stop / step))
        forward = np.linspace(0.0, n * step, n + 1)
    else:
        count = int(config.mu_grid.get("count", 64))
        if count < 1:
            raise ValueError("mu_grid count must be at least 1")
        forward = np.linspace(0.0, stop, count)
    grids = [forward]
    if config.mu_grid.get("mirror", False):
        grids.append(-forward)
    return grids


def cmd_sweep(config: RunConfig, out_dir, as_json: bool, threads: int) -> int:
    problem = config.problem()
    grids = _mu_grids(config)
    curves = [run_sweep(problem, g, tol=config.solve_tol, threads=threads) for g in grids]

    scan_cfg = config.scan
    sigmas = np.linspace(
        float(scan_cfg.get("sigma_min", 0.9)),
        float(scan_cfg.get("sigma_max", 1.1)),
        int(scan_cfg.get("sigma_count", 41)),
    )
    scan_mus = np.linspace(0.0, float(scan_cfg.get("mu_max", 0.05)), int(scan_cfg.get("mu_count", 21)))
    scan = zero_set_scan(problem, sigmas, scan_mus)

    rows = []
    for curve in curves:
        for e in curve.entries:
            rows.append((e.mu, e.sigma_star, e.period, e.closure_residual))
    rows.sort(key=lambda r: r[0])

    directions = ["positive", "negative"]
    summary = {
        "entries": len(rows),
        "scan": {
            "row_complete": scan.row_complete,
            "components": scan.component_count(),
            "boundary_signs": [int(scan.signs[0, 0]), int(scan.signs[-1, 0])],
        },
    }
    for name, curve in zip(directions, curves):
        summary[f"empirical_delta0_{name}"] = curve.empirical_delta0
        summary[f"connect_gap_{name}"] = curve.connect_gap
        summary[f"failure_{name}"] = curve.failure

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        serialize.write_csv(
            out / "sweep.csv", ["mu", "sigma_star", "period", "closure_residual"], rows
        )
        scan_rows = [
            [serialize.fmt(s)] + [int(v) for v in scan.signs[i]] for i, s in enumerate(sigmas)
        ]
        serialize.write_csv(
            out / "zero_set.csv",
            ["sigma"] + [serialize.fmt(m) for m in scan_mus],
            scan_rows,
        )
        serialize.dump(summary, out / "sweep_summary.json")
    _emit(summary, as_json)

    ok = all(c.failure is None for c in curves) and scan.row_complete
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_analyze(config: RunConfig, sigma: float, mu: float, as_json: bool) -> int:
    if mu != 0.0:
        raise ValueError("analyze covers the unperturbed central problem; mu must be 0")
    params = config.field.base
    problem = radial_problem_from_launch(params, config.radius, sigma)
    circular = problem.r_max - problem.r_min < 1e-9
    phi = apsidal_angle(problem)
    try:
        phi_limit = apsidal_limit(params, config.radius)
    except DegenerateLimit:
        phi_limit = None

    apsis_list = []
    if not circular:
        w = circular_speed(params, config.radius) / config.radius
        traj = flow(
            config.field,
            0.0,
            (config.radius, 0.0),
            (0.0, sigma * circular_speed(params, config.radius)),
            2.0 * math.pi / w,
            config.integrator,
        )
        apsis_list = [
            {"kind": ev.kind.value, "t": ev.t, "r": ev.r} for ev in apsides(traj)
        ]

    payload = {
        "E": problem.E,
        "K": problem.K,
        "r_min": problem.r_min,
        "r_max": problem.r_max,
        "Phi": phi,
        "Phi_limit": phi_limit,
        "circular": bool(circular),
        "apsides": apsis_list,
    }
    _emit(payload, as_json)
    return EXIT_OK


def _check_declared_symmetries(config: RunConfig):
    try:
        residuals = check_symmetry(
            config.field,
            0.5 * config.field.mu_range,
            sample_count=config.symmetry_samples,
            seed=config.seed,
        )
        return True, {r.value: v for r, v in residuals.items()}
    except SymmetryViolation as exc:
        return False, {r.value: v for r, v in exc.residuals.items()}


def _check_sign_table(config: RunConfig):
    expected = {(0.0, 1): 1, (0.0, -1): -1, (0.5, 1): 1, (0.5, -1): -1,
                (2.0, 1): -1, (2.0, -1): 1, (3.0, 1): -1, (3.0, -1): 1}
    got = {}
    for alpha, eps_sign in expected:
        pa = PowerLawParams(config.field.base.kappa, alpha)
        got[(alpha, eps_sign)] = sign_table(pa, eps_sign * 0.05, radius=config.radius)
    detail = {f"alpha={a},eps={e:+d}": f"{got[(a, e)]:+d}" for (a, e) in sorted(got)}
    return got == expected, detail


def _check_radial_accel_identity(config: RunConfig):
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0, 2.0):
        pa = PowerLawParams(config.field.base.kappa, alpha)
        for eps in (0.1, -0.1, 0.01, -0.01):
            diff = abs(
                radial_accel_finite_difference(pa, config.radius, eps)
                - radial_accel_at_launch(pa, config.radius, eps)
            )
            worst = max(worst, diff)
    return worst < 1e-5, {"worst_abs_error": worst}


def _check_crossing_continuity(config: RunConfig):
    # Probes stay inside the configured bracket band so steep-force setups
    # are not pushed out of range.
    rng = np.random.default_rng(config.seed)
    problem = config.problem()
    ok, probes = True, []
    for _ in range(3):
        sigma = 1.0 + float(rng.uniform(-0.5 * problem.eta, 0.5 * problem.eta))
        mu = float(rng.uniform(0.0, min(0.05, 0.5 * config.field.mu_range)))
        devs = crossing_time_deviation(problem, mu, sigma)
        probes.append({"sigma": sigma, "mu": mu, "deviations": devs})
        ok = ok and devs[0] > devs[1] > devs[2]
    return ok, probes


def _check_conservation(config: RunConfig):
    # Energy and angular momentum at mu = 0 over one period, or over whatever
    # span of it stays inside the annulus.
    params = config.field.base
    sigma = 1.05 if params.alpha < 2.0 else 1.01
    v0 = circular_speed(params, config.radius)
    w = v0 / config.radius
    try:
        traj = flow(
            config.field,
            0.0,
            (config.radius, 0.0),
            (0.0, sigma * v0),
            2.0 * math.pi / w,
            config.integrator,
        )
    except DomainExit as exc:
        traj = exc.trajectory
    states = [traj.interpolate(t) for t in np.linspace(0.0, traj.t_end, 256)]
    h0 = energy(params, states[0])
    k0 = angular_momentum(states[0])
    scale_h = max(abs(h0), 0.5 * v0 * v0)  # |H| may vanish at alpha = 2
    drift_h = max(abs(energy(params, s) - h0) for s in states) / scale_h
    drift_k = max(abs(angular_momentum(s) - k0) for s in states) / abs(k0)
    return drift_h < 1e-9 and drift_k < 1e-9, {
        "energy_drift": drift_h,
        "momentum_drift": drift_k,
        "span": traj.t_end,
    }


_VERIFY_CHECKS = (
    ("symmetry", _check_declared_symmetries),
    ("sign_table", _check_sign_table),
    ("radial_accel_identity", _check_radial_accel_identity),
    ("crossing_continuity", _check_crossing_continuity),
    ("conservation", _check_conservation),
)


def cmd_verify(config: RunConfig, as_json: bool) -> int:
    results = []
    for name, fn in _VERIFY_CHECKS:
        try:
            passed, detail = fn(config)
        except SolverError as exc:
            # An erroring check fails on its own; the rest still run.
            passed, detail = False, {"error": type(exc).__name__, "message": str(exc)}
        results.append({"name": name, "passed": bool(passed), "detail": detail})
    all_ok = all(r["passed"] for r in results)
    payload = {"checks": results, "passed": all_ok}
    if as_json:
        _emit(payload, True)
    else:
        for r in results:
            sys.stdout.write(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}\n")
        sys.stdout.write(("all checks passed" if all_ok else "FAILED") + "\n")
    if all_ok:
        return EXIT_OK
    sys.stderr.write(
        "failing checks: " + ", ".join(r["name"] for r in results if not r["passed"]) + "\n"
    )
    return EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symorbit",
        description="Symmetric periodic orbits of perturbed power-law fields by shooting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--json", action="store_true", help="machine-readable stdout")

    p_solve = sub.add_parser("solve", help="solve one mu and validate the orbit")
    common(p_solve)
    p_solve.add_argument("--mu", type=float, default=None)
    p_solve.add_argument("--out", default=None, help="directory for orbit.json/orbit.csv")

    p_sweep = sub.add_parser("sweep", help="mu continuation sweep plus miss-sign scan")
    common(p_sweep)
    p_sweep.add_argument("--out", default=None, help="directory for CSV/JSON outputs")
    p_sweep.add_argument("--threads", type=int, default=1)

    p_analyze = sub.add_parser("analyze", help="central-force diagnostics of a launch")
    common(p_analyze)
    p_analyze.add_argument("--sigma", type=float, required=True)
    p_analyze.add_argument("--mu", type=float, default=0.0)

    p_verify = sub.add_parser("verify", help="run the named property-check battery")
    common(p_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config)
    except (OSError, KeyError, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG

    try:
        if args.command == "solve":
            mu = config.mu if args.mu is None else args.mu
            return cmd_solve(config, mu, args.out, args.json)
        if args.command == "sweep":
            return cmd_sweep(config, args.out, args.json, args.threads)
        if args.command == "analyze":
            return cmd_analyze(config, args.sigma, args.mu, args.json)
        return cmd_verify(config, args.json)
    except SolverError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return exit_code_for(exc)
    except ValueError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
