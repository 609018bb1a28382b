"""Parameter sweeps of the shooting solve and a sign scan of the miss function.

The sweep walks mu away from zero, warm-starting each speed bracket at the
previous solution, and validates every assembled orbit; the first failure
truncates the curve and defines the empirical usable perturbation range. The
scan evaluates miss-function signs on a (sigma, mu) grid: uniform opposite
signs on the sigma boundaries plus a sign change inside every mu row is the
checkable footprint of a connected zero set crossing the whole mu range.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import BoundaryHypothesisFailure, BracketFailure, SolverError
from .orbit import PeriodicOrbit, extend_half, extend_quarter, validate_orbit
from .shooting import Mode, ShootingProblem, bracket, miss, solve


@dataclass(frozen=True)
class CurveEntry:
    mu: float
    sigma_star: float
    v_mu: tuple[float, float]
    period: float
    closure_residual: float
    diagnostics: dict


@dataclass
class ContinuationCurve:
    entries: list[CurveEntry] = dc_field(default_factory=list)
    empirical_delta0: float = 0.0  # largest |mu| that solved and validated
    connect_gap: float = 0.0  # max |sigma*(mu_{i+1}) - sigma*(mu_i)|
    failure: dict | None = None  # first failure, if the grid was truncated

    @property
    def mus(self) -> np.ndarray:
        return np.array([e.mu for e in self.entries])

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([e.sigma_star for e in self.entries])


def _check_grid(problem: ShootingProblem, mu_grid) -> np.ndarray:
    grid = np.asarray(mu_grid, dtype=float)
    if grid.size == 0 or grid[0] != 0.0:
        raise ValueError("mu grid must start at 0")
    if np.any(np.diff(np.abs(grid)) < 0):
        raise ValueError("mu grid must move monotonically away from 0")
    signs = np.sign(grid[grid != 0.0])
    if signs.size and not (np.all(signs > 0) or np.all(signs < 0)):
        raise ValueError("mu grid must keep one sign; sweep directions separately")
    if np.max(np.abs(grid)) > problem.field.mu_range:
        raise ValueError("mu grid exceeds the field's mu range")
    return grid


def _extend(problem: ShootingProblem, solution, mu: float) -> PeriodicOrbit:
    if problem.mode is Mode.QUARTER:
        return extend_quarter(solution.segment, mu=mu)
    return extend_half(solution.segment, mu=mu)


def _solve_and_validate(problem, mu, tol, warm_center=None):
    """One sweep cell: bracket (warm then cold), solve, extend, validate."""
    br = None
    if warm_center is not None:
        try:
            br = bracket(problem, mu, center=warm_center, half_widths=(0.25 * problem.eta,))
        except BracketFailure:
            br = None
    if br is None:
        br = bracket(problem, mu)
    sol = solve(problem, mu, tol=tol, prebuilt=br)
    orbit = _extend(problem, sol, mu)
    ok, diag = validate_orbit(orbit, problem.field, mu, problem.integrator)
    return sol, orbit, ok, diag


def sweep(
    problem: ShootingProblem,
    mu_grid,
    tol: float = 1e-10,
    threads: int = 1,
) -> ContinuationCurve:
    """Solve along a mu grid (starting at 0, one sign, monotone outward).

    Single-threaded runs warm-start each bracket at the previous sigma*;
    parallel runs use cold brackets so results stay order-independent. Either
    way the curve truncates at the first solve or validation failure.
    """
    grid = _check_grid(problem, mu_grid)
    curve = ContinuationCurve()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_solve_and_validate, problem, float(mu), tol, None)
                for mu in grid
            ]
            results = []
            for mu, fut in zip(grid, futures):
                try:
                    results.append((float(mu), fut.result(), None))
                except SolverError as exc:
                    results.append((float(mu), None, exc))
    else:
        results = []
        warm = None
        for mu in grid:
            try:
                res = _solve_and_validate(problem, float(mu), tol, warm_center=warm)
                warm = res[0].sigma_star
                results.append((float(mu), res, None))
            except SolverError as exc:
                results.append((float(mu), None, exc))
                break

    for mu, res, exc in results:
        if exc is not None:
            curve.failure = {"mu": mu, "error": type(exc).__name__, "message": str(exc)}
            break
        sol, orbit, ok, diag = res
        if not ok:
            curve.failure = {"mu": mu, "error": "ValidationFailure", "diagnostics": diag}
            break
        curve.entries.append(
            CurveEntry(
                mu=mu,
                sigma_star=sol.sigma_star,
                v_mu=(float(sol.v_mu[0]), float(sol.v_mu[1])),
                period=orbit.period,
                closure_residual=diag["closure_position"],
                diagnostics=diag,
            )
        )

    if curve.entries:
        curve.empirical_delta0 = float(np.max(np.abs(curve.mus)))
    if len(curve.entries) > 1:
        curve.connect_gap = float(np.max(np.abs(np.diff(curve.sigmas))))
    return curve


@dataclass
class ScanResult:
    sigmas: np.ndarray
    mus: np.ndarray
    signs: np.ndarray  # (n_sigma, n_mu) in {-1, 0, +1}; 0 marks a failed evaluation
    change_cells: list  # (i, j): sign change between sigma_i and sigma_{i+1} at mu_j
    components: list  # connected components of change cells (4-neighborhood)
    row_complete: bool  # every mu column contains at least one sign change

    def component_count(self) -> int:
        return len(self.components)


def zero_set_scan(
    problem: ShootingProblem,
    sigma_grid,
    mu_grid,
) -> ScanResult:
    """Sign matrix of the miss function over a (sigma, mu) grid.

    The sigma boundary rows must carry uniform opposite signs (the bracketing
    hypothesis across the whole mu range); BoundaryHypothesisFailure otherwise.
    Sign-change cells between adjacent sigma values trace the zero set.
    """
    sigmas = np.asarray(sigma_grid, dtype=float)
    mus = np.asarray(mu_grid, dtype=float)
    if sigmas.size < 2 or mus.size < 1:
        raise ValueError("need at least 2 sigma values and 1 mu value")

    signs = np.zeros((sigmas.size, mus.size), dtype=int)
    for i, s in enumerate(sigmas):
        for j, m in enumerate(mus):
            try:
                v = miss(problem, float(s), float(m)).value
                signs[i, j] = 1 if v > 0 else (-1 if v < 0 else 0)
            except SolverError:
                signs[i, j] = 0

    lo, hi = signs[0, :], signs[-1, :]
    if np.any(lo == 0) or np.any(hi == 0):
        raise BoundaryHypothesisFailure("miss function undefined on a sigma boundary")
    if len(set(lo.tolist())) != 1 or len(set(hi.tolist())) != 1:
        raise BoundaryHypothesisFailure(
            f"non-uniform boundary signs: sigma={sigmas[0]} row {lo.tolist()}, "
            f"sigma={sigmas[-1]} row {hi.tolist()}"
        )
    if lo[0] == hi[0]:
        raise BoundaryHypothesisFailure(
            f"equal signs ({lo[0]:+d}) on both sigma boundaries: no bracketing"
        )

    change_cells = [
        (i, j)
        for j in range(mus.size)
        for i in range(sigmas.size - 1)
        if signs[i, j] != 0 and signs[i + 1, j] != 0 and signs[i, j] != signs[i + 1, j]
    ]
    row_complete = all(any(c[1] == j for c in change_cells) for j in range(mus.size))

    # 8-neighborhood: a zero set drifting with mu crosses cell corners, which
    # 4-connectivity would report as spurious band breaks.
    cell_set = set(change_cells)
    components, seen = [], set()
    for cell in change_cells:
        if cell in seen:
            continue
        comp, stack = set(), [cell]
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            comp.add(c)
            i, j = c
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    nb = (i + di, j + dj)
                    if nb != c and nb in cell_set and nb not in seen:
                        stack.append(nb)
        components.append(sorted(comp))

    return ScanResult(
        sigmas=sigmas,
        mus=mus,
        signs=signs,
        change_cells=change_cells,
        components=components,
        row_complete=row_complete,
    )
