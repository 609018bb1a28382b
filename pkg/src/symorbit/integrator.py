"""Adaptive Dormand-Prince 5(4) integration of r'' = g(r, mu) with dense output.

The integrator propagates the fifth-order solution, estimates local error from
the embedded fourth-order result, and attaches a quartic interpolant to every
accepted step so downstream event detection can refine crossing times without
re-integrating. Leaving the validity annulus terminates the flow with a
DomainExit carrying the refined exit time and state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainExit, StepFailure
from .forcefield import ForceField

# Dormand-Prince 5(4) tableau; the propagated solution is order 5 and the
# last row of A doubles as its weights (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    ]
)
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# Difference between 5th- and 4th-order weights, including the FSAL stage.
_E = np.array(
    [71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic dense-output coefficients (Shampine); y(t0 + th) = y0 + h * (K^T P) @ [t, t^2, t^3, t^4].
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_step: float | None = None  # None: t_end / 50
    first_step: float | None = None  # None: automatic selection
    min_radius_guard: float | None = None  # None: annulus inner radius

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class State:
    t: float
    position: np.ndarray
    velocity: np.ndarray


class Trajectory:
    """Dense numerical solution on [0, t_end].

    Node states are reproduced exactly by interpolate(); interior times use the
    per-step quartic interpolant, continuous across the whole span.
    """

    def __init__(self, ts, ys, dense, t_end=None):
        self.ts = np.asarray(ts)
        self.ys = np.asarray(ys)
        self._dense = dense  # list of (t_left, h, y_left, Q) per step
        self.t_end = float(self.ts[-1]) if t_end is None else float(t_end)

    @property
    def t_span(self):
        return 0.0, self.t_end

    @property
    def n_steps(self):
        return len(self._dense)

    def _eval(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        i = min(max(i, 0), len(self._dense) - 1)
        t_left, h, y_left, q = self._dense[i]
        theta = (t - t_left) / h
        if theta == 0.0:
            return y_left.copy()
        tp = np.array([theta, theta**2, theta**3, theta**4])
        return y_left + h * (q @ tp)

    def interpolate(self, t: float) -> State:
        y = self._eval(float(t))
        return State(t=float(t), position=y[:2], velocity=y[2:])

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(times, states) at n uniform times across the full span."""
        ts = np.linspace(0.0, self.t_end, n)
        out = np.empty((n, 4))
        for k, t in enumerate(ts):
            out[k] = self._eval(t)
        return ts, out

    def final_state(self) -> State:
        return self.interpolate(self.t_end)

    def truncated(self, t_cut: float) -> "Trajectory":
        """Restriction to [0, t_cut]; keeps the step that straddles t_cut."""
        if not 0.0 < t_cut <= self.t_end + 1e-15:
            raise ValueError(f"t_cut={t_cut} outside span (0, {self.t_end}]")
        keep = [d for d in self._dense if d[0] < t_cut]
        n = len(keep)
        ts = list(self.ts[: n + 1])
        ys = list(self.ys[: n + 1])
        ts[-1] = t_cut
        ys[-1] = self._eval(t_cut)
        return Trajectory(np.array(ts), np.array(ys), keep, t_end=t_cut)

    def write_csv(self, path, n_samples: int = 1024, fmt: str = ".17g"):
        ts, states = self.sample(n_samples)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,x,y,vx,vy\n")
            for t, s in zip(ts, states):
                row = [t, s[0], s[1], s[2], s[3]]
                fh.write(",".join(format(v, fmt) for v in row) + "\n")


def _initial_step(rhs, y0, f0, t_end, rtol, atol, max_step):
    # Hairer-style starting-step heuristic.
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, t_end)


def _refine_domain_exit(dense_step, r_in, r_out):
    """Bisect inside one step for the earliest time the radius leaves [r_in, r_out]."""
    t_left, h, y_left, q = dense_step

    def excess(theta):
        tp = np.array([theta, theta**2, theta**3, theta**4])
        y = y_left + h * (q @ tp)
        r = math.hypot(y[0], y[1])
        return max(r_in - r, r - r_out)

    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    theta = hi
    tp = np.array([theta, theta**2, theta**3, theta**4])
    y = y_left + h * (q @ tp)
    return t_left + theta * h, y


def flow(
    field: ForceField,
    mu: float,
    x,
    v,
    t_end: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate r'' = g(r, mu) from (x, v) over [0, t_end].

    Raises DomainExit (with partial trajectory) when the orbit leaves the
    annulus, StepFailure if the step size underflows.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not field.contains(x[0], x[1]):
        raise DomainExit(f"initial position {tuple(x)} outside annulus", t_exit=0.0, state=x)

    r_out = field.annulus[1]
    r_in = field.annulus[0] if cfg.min_radius_guard is None else cfg.min_radius_guard
    accel = field.acceleration

    def rhs(y):
        ax, ay = accel(y[0], y[1], mu)
        return np.array([y[2], y[3], ax, ay])

    max_step = cfg.max_step if cfg.max_step is not None else t_end / 50.0
    rtol, atol = cfg.rel_tol, cfg.abs_tol

    y = np.concatenate([x, v])
    t = 0.0
    f_first = rhs(y)
    if cfg.first_step is not None:
        h = min(cfg.first_step, max_step, t_end)
    else:
        h = _initial_step(rhs, y, f_first, t_end, rtol, atol, max_step)
    min_step = 1e-14 * max(t_end, 1.0)

    ts = [0.0]
    ys = [y.copy()]
    dense = []
    k_first = f_first
    K = np.empty((7, 4))

    while t < t_end:
        if t_end - t <= min_step:
            break  # remainder below time resolution: the span is covered
        h = min(h, max_step, t_end - t)
        if h < min_step:
            raise StepFailure(f"step size underflow at t={t} (h={h})")

        K[0] = k_first
        bad_stage = False
        for i in range(1, 6):
            y_stage = y + h * (K[:i].T @ _A[i, :i])
            if not np.all(np.isfinite(y_stage)) or math.hypot(y_stage[0], y_stage[1]) < 1e-12:
                bad_stage = True
                break
            K[i] = rhs(y_stage)
        if not bad_stage:
            y_new = y + h * (K[:6].T @ _B)
            if not np.all(np.isfinite(y_new)) or math.hypot(y_new[0], y_new[1]) < 1e-12:
                bad_stage = True
            else:
                K[6] = rhs(y_new)
        if bad_stage or not np.all(np.isfinite(K)):
            h *= 0.5
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((h * (_E @ K) / scale) ** 2)))

        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err**-0.2)
            continue

        q = K.T @ _P
        dense.append((t, h, y.copy(), q))
        t_next = t + h
        ts.append(t_next)
        ys.append(y_new.copy())

        rr = math.hypot(y_new[0], y_new[1])
        if rr < r_in or rr > r_out:
            t_exit, y_exit = _refine_domain_exit(dense[-1], r_in, r_out)
            ts[-1] = t_exit
            ys[-1] = y_exit
            traj = Trajectory(ts, ys, dense, t_end=t_exit)
            raise DomainExit(
                f"orbit left annulus [{r_in}, {r_out}] at t={t_exit:.6g}",
                t_exit=t_exit,
                state=State(t=t_exit, position=y_exit[:2], velocity=y_exit[2:]),
                trajectory=traj,
            )

        factor = _MAX_FACTOR if err == 0.0 else min(_MAX_FACTOR, max(1.0, _SAFETY * err**-0.2))
        h *= factor
        t, y, k_first = t_next, y_new, K[6].copy()

    return Trajectory(ts, ys, dense)


def flow_with_reflection_check(
    field: ForceField,
    mu: float,
    x0,
    v,
    t_end: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    n_samples: int = 256,
) -> tuple[Trajectory, float]:
    """Integrate (x0, v) and its x-axis mirror image, report the equivariance residual.

    For a launch on the x-axis with vertical velocity, the mirrored initial
    condition is (x0, -v); if the field commutes with the reflection the two
    solutions are mirror images for all time, so the residual is integration
    noise. Requires x0 on the x-axis and v vertical.
    """
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    scale_x = max(1.0, float(np.max(np.abs(x0))))
    scale_v = max(1.0, float(np.max(np.abs(v))))
    if abs(x0[1]) > 1e-9 * scale_x:
        raise ValueError(f"launch point must lie on the x-axis, got y={x0[1]}")
    if abs(v[0]) > 1e-9 * scale_v:
        raise ValueError(f"launch velocity must be vertical, got vx={v[0]}")

    mirror = np.array([[1.0, 0.0], [0.0, -1.0]])
    traj1 = flow(field, mu, x0, v, t_end, cfg)
    traj2 = flow(field, mu, mirror @ x0, mirror @ v, t_end, cfg)

    worst = 0.0
    for t in np.linspace(0.0, t_end, n_samples):
        p1 = traj1.interpolate(t).position
        p2 = traj2.interpolate(t).position
        worst = max(worst, float(np.linalg.norm(mirror @ p1 - p2)))
    return traj1, worst
