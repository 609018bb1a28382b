"""Launch-speed shooting for orthogonal section crossings.

A vertical launch from (R, 0) at sigma times the circular speed defines a
one-parameter family. The miss function is the velocity component along the
section at the first transversal crossing: vertical component on the positive
y-axis in quarter mode, horizontal component on the negative x-axis in half
mode. Its zero is an orthogonal crossing, found by sign bracketing around
sigma = 1 and bisection; the bracket orientation flips with the force exponent
in half mode, matching the four-cell sign pattern reproduced by sign_table.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    BracketFailure,
    DomainExit,
    NoCrossing,
    NonConvergence,
    TangentialCrossing,
)
from .forcefield import ForceField, PowerLawParams, Reflection, circular_speed
from .integrator import IntegratorConfig, Trajectory
from .section import CrossingEvent, SectionSpec, crossing_time


class Mode(enum.Enum):
    QUARTER = "quarter"  # orthogonal hit of the positive y-axis, needs both symmetries
    HALF = "half"  # orthogonal hit of the negative x-axis, needs x-axis symmetry


@dataclass(frozen=True)
class ShootingProblem:
    """Field, launch circle radius, and solve geometry for one shooting setup."""

    field: ForceField
    radius: float
    mode: Mode
    eta: float = 0.1  # launch-speed bracket half-width around sigma = 1
    delta: float = 0.2  # admissible speed band half-width; eta < delta
    t_bar: float | None = None  # crossing window; None: 0.75 * circular period
    integrator: IntegratorConfig = dc_field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("launch radius must be positive")
        if not 0 < self.eta < self.delta < 1:
            raise ValueError("need 0 < eta < delta < 1")
        alpha = self.field.base.alpha
        syms = self.field.symmetries
        if self.mode is Mode.QUARTER:
            if alpha != 1.0:
                raise ValueError("quarter mode requires alpha == 1")
            if not {Reflection.X_AXIS, Reflection.Y_AXIS} <= syms:
                raise ValueError("quarter mode requires both reflection symmetries")
        else:
            if alpha == 1.0:
                raise ValueError("half mode requires alpha != 1")
            if Reflection.X_AXIS not in syms:
                raise ValueError("half mode requires the x-axis reflection symmetry")

    @property
    def launch_point(self) -> np.ndarray:
        return np.array([self.radius, 0.0])

    @property
    def circular_velocity(self) -> float:
        return circular_speed(self.field.base, self.radius)

    @property
    def angular_speed(self) -> float:
        return self.circular_velocity / self.radius

    @property
    def window(self) -> float:
        if self.t_bar is not None:
            return self.t_bar
        return 0.75 * (2.0 * math.pi / self.angular_speed)

    @property
    def section(self) -> SectionSpec:
        floor = 1e-6 * self.circular_velocity
        if self.mode is Mode.QUARTER:
            return SectionSpec.positive_y_axis(self.radius, transversality_floor=floor)
        return SectionSpec.negative_x_axis(self.radius, transversality_floor=floor)

    @property
    def crossing_hint(self) -> float:
        # Circular-orbit crossing time: quarter revolution or half revolution.
        fraction = 0.25 if self.mode is Mode.QUARTER else 0.5
        return fraction * (2.0 * math.pi / self.angular_speed)

    def launch_velocity(self, sigma: float) -> np.ndarray:
        return np.array([0.0, sigma * self.circular_velocity])


@dataclass(frozen=True)
class MissValue:
    sigma: float
    value: float  # section-aligned velocity component at the crossing
    crossing: CrossingEvent
    trajectory: Trajectory


@dataclass(frozen=True)
class ShootingSolution:
    sigma_star: float
    v_mu: np.ndarray  # vertical launch velocity (0, sigma* v0)
    tau: float  # crossing time of the orthogonal hit
    segment: Trajectory  # trajectory restricted to [0, tau]
    miss_residual: float
    crossing: CrossingEvent


def miss(problem: ShootingProblem, sigma: float, mu: float) -> MissValue:
    """Miss value for launch speed multiplier sigma at parameter mu."""
    if not (1.0 - problem.delta) < sigma < (1.0 + problem.delta):
        raise ValueError(f"sigma={sigma} outside (1-delta, 1+delta)")
    t_star, event, traj = crossing_time(
        problem.field,
        mu,
        problem.launch_point,
        problem.launch_velocity(sigma),
        problem.section,
        problem.window,
        problem.integrator,
        t_hint=problem.crossing_hint,
    )
    return MissValue(sigma=sigma, value=event.tangent_speed, crossing=event, trajectory=traj)


def miss_quarter(problem: ShootingProblem, sigma: float, mu: float) -> MissValue:
    """Vertical velocity at the first positive-y-axis crossing (quarter mode)."""
    if problem.mode is not Mode.QUARTER:
        raise ValueError("miss_quarter requires a quarter-mode problem")
    return miss(problem, sigma, mu)


def miss_half(problem: ShootingProblem, sigma: float, mu: float) -> MissValue:
    """Horizontal velocity at the first negative-x-axis crossing (half mode)."""
    if problem.mode is not Mode.HALF:
        raise ValueError("miss_half requires a half-mode problem")
    return miss(problem, sigma, mu)


@dataclass(frozen=True)
class Bracket:
    sigma_lo: float
    sigma_hi: float
    miss_lo: MissValue
    miss_hi: MissValue


def bracket(
    problem: ShootingProblem,
    mu: float,
    eta: float | None = None,
    center: float = 1.0,
    half_widths: tuple[float, ...] | None = None,
) -> Bracket:
    """Two launch multipliers around `center` with opposite miss signs.

    Tries half-width eta/2 first, then eta. Failure at the full width is the
    operational definition of mu exceeding the usable perturbation range, so
    every evaluation error is folded into BracketFailure.
    """
    eta = problem.eta if eta is None else eta
    widths = half_widths if half_widths is not None else (0.5 * eta, eta)
    last_cause = None
    for w in widths:
        lo, hi = center - w, center + w
        try:
            m_lo = miss(problem, lo, mu)
            m_hi = miss(problem, hi, mu)
        except (NoCrossing, TangentialCrossing, DomainExit, ValueError) as exc:
            last_cause = exc
            continue
        if m_lo.value == 0.0 or m_hi.value == 0.0:
            # An exact zero at a probe point is still a usable bracket edge.
            return Bracket(lo, hi, m_lo, m_hi)
        if m_lo.value * m_hi.value < 0.0:
            return Bracket(lo, hi, m_lo, m_hi)
        last_cause = None
    detail = f" (last evaluation error: {last_cause})" if last_cause else ""
    raise BracketFailure(
        f"no miss sign change around sigma={center} within half-width {widths[-1]} "
        f"at mu={mu}{detail}",
        cause=last_cause,
    )


def solve(
    problem: ShootingProblem,
    mu: float,
    tol: float = 1e-10,
    max_iter: int = 200,
    prebuilt: Bracket | None = None,
) -> ShootingSolution:
    """Bisect the miss function to an orthogonal crossing velocity.

    Returns the launch velocity, the crossing time tau, and the generating
    trajectory segment over [0, tau].
    """
    br = prebuilt if prebuilt is not None else bracket(problem, mu)
    lo, hi = br.sigma_lo, br.sigma_hi
    f_lo = br.miss_lo.value
    best = br.miss_lo if abs(br.miss_lo.value) <= abs(br.miss_hi.value) else br.miss_hi

    if abs(best.value) >= tol:
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            m_mid = miss(problem, mid, mu)
            if abs(m_mid.value) < abs(best.value):
                best = m_mid
            if abs(m_mid.value) < tol:
                break
            if f_lo * m_mid.value < 0.0:
                hi = mid
            else:
                lo, f_lo = mid, m_mid.value
            if hi - lo < 1e-15:
                break
        if abs(best.value) >= tol:
            raise NonConvergence(
                f"|miss|={abs(best.value):.3g} still above tol={tol} after "
                f"{max_iter} bisection steps at mu={mu}"
            )

    tau = best.crossing.t_star
    return ShootingSolution(
        sigma_star=best.sigma,
        v_mu=problem.launch_velocity(best.sigma),
        tau=tau,
        segment=best.trajectory.truncated(tau),
        miss_residual=best.value,
        crossing=best.crossing,
    )


# Geometry for the sign-pattern probe: the unperturbed power law is defined on
# the whole punctured plane, and for alpha >= 2 the angle-pi crossing can sit
# far from the launch circle, so the probe uses a wide annulus and section.
_SIGN_TABLE_ANNULUS = (0.05, 20.0)
_SIGN_TABLE_SECTION_SPAN = (0.1, 8.0)


def sign_table(
    params: PowerLawParams,
    epsilon: float = 0.05,
    radius: float = 1.0,
    cfg: IntegratorConfig | None = None,
) -> int:
    """Sign of the horizontal velocity at the first negative-x-axis crossing.

    Pure power law (mu = 0), launch speed (1 + epsilon) times circular.
    Requires alpha != 1: there the crossing is orthogonal for every epsilon
    and the sign degenerates.
    """
    if params.alpha == 1.0:
        raise ValueError("sign pattern undefined at alpha == 1")
    if epsilon == 0.0:
        raise ValueError("epsilon must be nonzero")
    field = ForceField(
        base=params,
        mu_range=1.0,
        annulus=(_SIGN_TABLE_ANNULUS[0] * radius, _SIGN_TABLE_ANNULUS[1] * radius),
    )
    v0 = circular_speed(params, radius)
    w = v0 / radius
    section = SectionSpec(
        start=(-_SIGN_TABLE_SECTION_SPAN[1] * radius, 0.0),
        end=(-_SIGN_TABLE_SECTION_SPAN[0] * radius, 0.0),
        transversality_floor=1e-6 * v0,
        kind="negative_x_axis",
    )
    cfg = cfg if cfg is not None else IntegratorConfig()
    _, event, _ = crossing_time(
        field,
        0.0,
        np.array([radius, 0.0]),
        np.array([0.0, (1.0 + epsilon) * v0]),
        section,
        3.0 * (2.0 * math.pi / w),
        cfg,
    )
    return 1 if event.tangent_speed > 0 else -1


def crossing_time_deviation(
    problem: ShootingProblem,
    mu: float,
    sigma: float,
    steps: tuple[float, ...] = (1e-3, 1e-4, 1e-5),
) -> list[float]:
    """|t(sigma + h, mu) - t(sigma, mu)| for each h: a continuity probe."""
    t0 = miss(problem, sigma, mu).crossing.t_star
    return [abs(miss(problem, sigma + h, mu).crossing.t_star - t0) for h in steps]
