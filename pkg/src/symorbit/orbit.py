"""Reflection extension of solved segments into closed orbits, plus validation.

A half segment (x-axis to x-axis, both ends orthogonal) extends to a period-2tau
orbit by reflecting across the x-axis with time reversal. A quarter segment
(x-axis to y-axis, orthogonal at both ends) extends to a period-4tau orbit using
both axis reflections. The assembled orbit is checked independently: closure by
re-integration, simplicity by a segment-pair sweep, origin enclosure by winding
number, trace symmetry by reflected-sample distance, and the two-point x-axis
crossing property by a refined sign scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisViolation, PointOnCurve
from .forcefield import ForceField, Reflection
from .integrator import IntegratorConfig, State, Trajectory, flow

_ENDPOINT_RTOL = 1e-8  # on-axis / orthogonality tolerance relative to segment scale
_DEFAULT_SAMPLES = 1024


class PeriodicOrbit:
    """Closed orbit assembled from a solved segment.

    `samples` holds n+1 uniformly spaced states over one period, first and last
    coinciding up to construction round-off; `at(t)` evaluates the underlying
    piecewise-reflected interpolant at any time.
    """

    def __init__(self, period, segment, branch_eval, symmetry, mu, v_mu, n_samples):
        self.period = float(period)
        self.segment = segment
        self._branch_eval = branch_eval
        self.symmetry = frozenset(symmetry)
        self.mu = float(mu)
        self.v_mu = np.asarray(v_mu, dtype=float)
        self.times = np.linspace(0.0, self.period, n_samples + 1)
        self.states = np.array([branch_eval(t) for t in self.times])
        self.diagnostics: dict = {}

    @property
    def symmetry_label(self) -> str:
        if Reflection.Y_AXIS in self.symmetry:
            return "x_and_y_axes"
        return "x_axis"

    def at(self, t: float) -> State:
        y = self._branch_eval(float(t))
        return State(t=float(t), position=y[:2], velocity=y[2:])

    def initial_state(self) -> State:
        return self.at(0.0)

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, 2:]

    def to_dict(self, include_samples: bool = True) -> dict:
        out = {
            "mu": self.mu,
            "v_mu": list(self.v_mu),
            "period": self.period,
            "symmetry": self.symmetry_label,
            "diagnostics": self.diagnostics,
        }
        if include_samples:
            out["samples"] = [
                [t, s[0], s[1], s[2], s[3]] for t, s in zip(self.times, self.states)
            ]
        return out

    def write_csv(self, path, fmt: str = ".17g"):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("t,x,y,vx,vy\n")
            for t, s in zip(self.times, self.states):
                fh.write(",".join(format(v, fmt) for v in (t, s[0], s[1], s[2], s[3])) + "\n")


def _segment_scales(segment: Trajectory) -> tuple[float, float]:
    s0 = segment.interpolate(0.0)
    s1 = segment.interpolate(segment.t_end)
    r_scale = max(np.max(np.abs(s0.position)), np.max(np.abs(s1.position)), 1e-30)
    v_scale = max(np.max(np.abs(s0.velocity)), np.max(np.abs(s1.velocity)), 1e-30)
    return float(r_scale), float(v_scale)


def extend_half(
    segment: Trajectory,
    mu: float = 0.0,
    n_samples: int = _DEFAULT_SAMPLES,
) -> PeriodicOrbit:
    """Close a segment with both endpoints on the x-axis and vertical velocities.

    The second half is the x-axis mirror image traversed backwards; the result
    has period 2*tau and an x-axis-symmetric trace.
    """
    tau = segment.t_end
    s0 = segment.interpolate(0.0)
    s1 = segment.interpolate(tau)
    r_scale, v_scale = _segment_scales(segment)
    checks = {
        "y(0)": (s0.position[1], _ENDPOINT_RTOL * r_scale),
        "y(tau)": (s1.position[1], _ENDPOINT_RTOL * r_scale),
        "vx(0)": (s0.velocity[0], _ENDPOINT_RTOL * v_scale),
        "vx(tau)": (s1.velocity[0], _ENDPOINT_RTOL * v_scale),
    }
    bad = {k: v for k, (v, tol) in checks.items() if abs(v) > tol}
    if bad:
        raise HypothesisViolation(
            f"half-extension endpoint conditions violated: {bad} "
            f"(tolerance {_ENDPOINT_RTOL:g} of scale)"
        )

    period = 2.0 * tau

    def branch_eval(t: float) -> np.ndarray:
        s = t % period
        if s <= tau:
            y = segment._eval(s)
            return y.copy()
        y = segment._eval(period - s)
        return np.array([y[0], -y[1], -y[2], y[3]])

    return PeriodicOrbit(
        period=period,
        segment=segment,
        branch_eval=branch_eval,
        symmetry={Reflection.X_AXIS},
        mu=mu,
        v_mu=s0.velocity,
        n_samples=n_samples,
    )


def extend_quarter(
    segment: Trajectory,
    mu: float = 0.0,
    n_samples: int = _DEFAULT_SAMPLES,
) -> PeriodicOrbit:
    """Close a segment running from the x-axis (vertical velocity) to the
    y-axis (horizontal velocity) using both axis reflections; period 4*tau.
    """
    tau = segment.t_end
    s0 = segment.interpolate(0.0)
    s1 = segment.interpolate(tau)
    r_scale, v_scale = _segment_scales(segment)
    checks = {
        "y(0)": (s0.position[1], _ENDPOINT_RTOL * r_scale),
        "vx(0)": (s0.velocity[0], _ENDPOINT_RTOL * v_scale),
        "x(tau)": (s1.position[0], _ENDPOINT_RTOL * r_scale),
        "vy(tau)": (s1.velocity[1], _ENDPOINT_RTOL * v_scale),
    }
    bad = {k: v for k, (v, tol) in checks.items() if abs(v) > tol}
    if bad:
        raise HypothesisViolation(
            f"quarter-extension endpoint conditions violated: {bad} "
            f"(tolerance {_ENDPOINT_RTOL:g} of scale)"
        )

    period = 4.0 * tau

    def branch_eval(t: float) -> np.ndarray:
        s = t % period
        if s <= tau:
            y = segment._eval(s)
            return y.copy()
        if s <= 2.0 * tau:
            # y-axis mirror, time reversed; the unique C1 continuation at tau.
            y = segment._eval(2.0 * tau - s)
            return np.array([-y[0], y[1], y[2], -y[3]])
        if s <= 3.0 * tau:
            y = segment._eval(s - 2.0 * tau)
            return np.array([-y[0], -y[1], -y[2], -y[3]])
        y = segment._eval(period - s)
        return np.array([y[0], -y[1], -y[2], y[3]])

    return PeriodicOrbit(
        period=period,
        segment=segment,
        branch_eval=branch_eval,
        symmetry={Reflection.X_AXIS, Reflection.Y_AXIS},
        mu=mu,
        v_mu=s0.velocity,
        n_samples=n_samples,
    )


def verify_closure(
    orbit: PeriodicOrbit,
    field: ForceField,
    mu: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> tuple[float, float]:
    """Re-integrate one full period from the orbit start; return the position
    and velocity mismatches. Independent of the reflection construction."""
    s0 = orbit.initial_state()
    traj = flow(field, mu, s0.position, s0.velocity, orbit.period, cfg)
    s1 = traj.final_state()
    return (
        float(np.linalg.norm(s1.position - s0.position)),
        float(np.linalg.norm(s1.velocity - s0.velocity)),
    )


def _polyline(orbit_or_points) -> np.ndarray:
    if isinstance(orbit_or_points, PeriodicOrbit):
        pts = orbit_or_points.positions
    else:
        pts = np.asarray(orbit_or_points, dtype=float)
    # Drop a duplicated closing point; segments wrap around implicitly.
    if np.allclose(pts[0], pts[-1], atol=1e-9 * max(1.0, np.max(np.abs(pts)))):
        pts = pts[:-1]
    return pts


def is_simple_closed(orbit_or_points, min_points: int = 256):
    """(True, None) when no two non-adjacent polyline segments cross properly,
    else (False, crossing point)."""
    pts = _polyline(orbit_or_points)
    n = len(pts)
    if n < min_points:
        raise ValueError(f"need at least {min_points} sample points, got {n}")
    nxt = np.roll(pts, -1, axis=0)
    d = nxt - pts  # segment direction vectors

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    for i in range(n - 2):
        j0 = i + 2
        j1 = n if i > 0 else n - 1  # skip the wrap-adjacent pair (0, n-1)
        if j0 >= j1:
            continue
        a, b, da = pts[i], nxt[i], d[i]
        c, e, dc = pts[j0:j1], nxt[j0:j1], d[j0:j1]
        d1 = cross(dc, a - c)
        d2 = cross(dc, b - c)
        d3 = cross(da[None, :], c - a)
        d4 = cross(da[None, :], e - a)
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        if np.any(hit):
            k = int(np.argmax(hit))
            # Line-line intersection point of the first crossing pair.
            t = d3[k] / (d3[k] - d4[k])
            return False, c[k] + t * dc[k]
    return True, None


def winding_number(orbit_or_points, point=(0.0, 0.0)) -> int:
    """Signed number of turns of the closed curve around `point`."""
    pts = _polyline(orbit_or_points)
    p = np.asarray(point, dtype=float)
    rel = pts - p
    dist = np.hypot(rel[:, 0], rel[:, 1])
    if np.min(dist) < 1e-9:
        raise PointOnCurve(f"a sample lies within 1e-9 of {tuple(p)}")
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d -= 2.0 * math.pi * np.round(d / (2.0 * math.pi))
    return int(round(float(np.sum(d)) / (2.0 * math.pi)))


def symmetry_residual(orbit: PeriodicOrbit, reflections=None) -> dict:
    """Largest distance from any reflected sample to the orbit trace, per reflection."""
    refls = orbit.symmetry if reflections is None else reflections
    pts = _polyline(orbit)
    starts = pts
    ends = np.roll(pts, -1, axis=0)
    d = ends - starts
    len2 = np.maximum(np.sum(d * d, axis=1), 1e-300)

    out = {}
    for refl in sorted(refls, key=lambda r: r.value):
        refl = Reflection(refl)
        q = pts.copy()
        if refl is Reflection.X_AXIS:
            q[:, 1] = -q[:, 1]
        else:
            q[:, 0] = -q[:, 0]
        worst = 0.0
        for lo in range(0, len(q), 128):
            chunk = q[lo : lo + 128]
            w = chunk[:, None, :] - starts[None, :, :]
            t = np.clip(np.sum(w * d[None, :, :], axis=2) / len2[None, :], 0.0, 1.0)
            proj = starts[None, :, :] + t[:, :, None] * d[None, :, :]
            dist = np.min(np.linalg.norm(chunk[:, None, :] - proj, axis=2), axis=1)
            worst = max(worst, float(np.max(dist)))
        out[refl] = worst
    return out


@dataclass(frozen=True)
class AxisCrossing:
    t: float
    point: np.ndarray
    normal_speed: float  # velocity component transverse to the axis


def axis_crossings(orbit: PeriodicOrbit, axis: str = "x") -> list[AxisCrossing]:
    """Transversal crossings of a coordinate axis over one period.

    Crossings at sample points (e.g. the launch point) are recognized by a
    zero band; crossings between samples are refined by bisection on the
    orbit interpolant.
    """
    if axis not in ("x", "y"):
        raise ValueError("axis must be 'x' or 'y'")
    ci = 1 if axis == "x" else 0  # coordinate that vanishes on the axis
    vi = ci + 2
    r_scale = float(np.max(np.abs(orbit.positions)))
    v_scale = float(np.max(np.abs(orbit.velocities)))
    z_tol = 1e-9 * r_scale
    floor = 1e-6 * v_scale

    ts = orbit.times[:-1]
    vals = orbit.states[:-1, ci]
    n = len(ts)
    is_zero = np.abs(vals) < z_tol

    crossings = []
    visited = np.zeros(n, dtype=bool)
    for k in range(n):
        if is_zero[k] and not visited[k]:
            # Cluster of consecutive on-axis samples (wraparound-aware).
            idxs = [k]
            visited[k] = True
            j = (k + 1) % n
            while is_zero[j] and not visited[j]:
                visited[j] = True
                idxs.append(j)
                j = (j + 1) % n
            j = (k - 1) % n
            while is_zero[j] and not visited[j]:
                visited[j] = True
                idxs.insert(0, j)
                j = (j - 1) % n
            mid = idxs[len(idxs) // 2]
            state = orbit.states[mid]
            if abs(state[vi]) >= floor:
                crossings.append(
                    AxisCrossing(t=float(ts[mid]), point=state[:2].copy(), normal_speed=float(state[vi]))
                )

    for k in range(n):
        k2 = (k + 1) % n
        if is_zero[k] or is_zero[k2]:
            continue
        if vals[k] * vals[k2] < 0.0:
            a = ts[k]
            b = orbit.times[k + 1]  # == period for the wrap interval
            fa = vals[k]
            for _ in range(80):
                m = 0.5 * (a + b)
                fm = orbit._branch_eval(m)[ci]
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            t_star = 0.5 * (a + b)
            y = orbit._branch_eval(t_star)
            if abs(y[vi]) >= floor:
                crossings.append(
                    AxisCrossing(t=t_star, point=y[:2].copy(), normal_speed=float(y[vi]))
                )

    crossings.sort(key=lambda c: c.t)
    return crossings


def validate_orbit(
    orbit: PeriodicOrbit,
    field: ForceField,
    mu: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    pos_tol: float = 1e-6,
    vel_tol: float = 1e-5,
    sym_tol: float = 1e-7,
    crossing_tol: float = 1e-6,
) -> tuple[bool, dict]:
    """Full acceptance battery for a constructed orbit.

    Closure by re-integration, simple-closedness, winding +-1 around the
    origin, trace symmetry under the declared reflections, and exactly two
    transversal x-axis crossings (at +-x0 when both symmetries hold, at x0 and
    a negative abscissa otherwise).
    """
    pos_res, vel_res = verify_closure(orbit, field, mu, cfg)
    simple, xing_pt = is_simple_closed(orbit)
    wind = winding_number(orbit)
    sym = symmetry_residual(orbit)
    crossings = axis_crossings(orbit, "x")

    x0 = float(orbit.initial_state().position[0])
    crossing_ok = len(crossings) == 2
    if crossing_ok:
        xs = sorted(c.point[0] for c in crossings)
        if Reflection.Y_AXIS in orbit.symmetry:
            crossing_ok = abs(xs[0] + x0) < crossing_tol and abs(xs[1] - x0) < crossing_tol
        else:
            crossing_ok = xs[0] < 0.0 and abs(xs[1] - x0) < crossing_tol

    diag = {
        "closure_position": pos_res,
        "closure_velocity": vel_res,
        "simple_closed": bool(simple),
        "self_intersection": None if xing_pt is None else [float(xing_pt[0]), float(xing_pt[1])],
        "winding_number": wind,
        "symmetry_residuals": {r.value: v for r, v in sym.items()},
        "x_axis_crossings": [
            {"t": c.t, "x": float(c.point[0]), "y": float(c.point[1]), "normal_speed": c.normal_speed}
            for c in crossings
        ],
        "crossings_ok": bool(crossing_ok),
    }
    ok = (
        pos_res < pos_tol
        and vel_res < vel_tol
        and simple
        and abs(wind) == 1
        and all(v < sym_tol for v in sym.values())
        and crossing_ok
    )
    diag["valid"] = bool(ok)
    orbit.diagnostics.update(diag)
    return ok, diag
