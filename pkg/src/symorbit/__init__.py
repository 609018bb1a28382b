"""Symmetric periodic orbits of perturbed planar power-law problems by shooting."""

from .analysis import (
    ApsisEvent,
    ApsisKind,
    RadialProblem,
    angular_momentum,
    apsidal_angle,
    apsidal_limit,
    apsides,
    effective_potential,
    energy,
    radial_accel_at_launch,
    radial_problem_from_launch,
    turning_radii,
)
from .continuation import ContinuationCurve, CurveEntry, ScanResult, sweep, zero_set_scan
from .errors import (
    BoundaryCrossing,
    BoundaryHypothesisFailure,
    BracketFailure,
    DegenerateLimit,
    DomainExit,
    HypothesisViolation,
    NoBoundedMotion,
    NoCrossing,
    NonConvergence,
    PointOnCurve,
    SolverError,
    StepFailure,
    SymmetryViolation,
    TangentialCrossing,
)
from .forcefield import (
    ForceField,
    PerturbationSpec,
    PowerLawParams,
    Reflection,
    axis_poly_perturbation,
    check_symmetry,
    circular_speed,
    eval_force,
    field_from_config,
    field_from_json,
    potential,
    potential_derivatives,
    radial_power_perturbation,
    zero_perturbation,
)
from .integrator import IntegratorConfig, State, Trajectory, flow, flow_with_reflection_check
from .orbit import (
    AxisCrossing,
    PeriodicOrbit,
    axis_crossings,
    extend_half,
    extend_quarter,
    is_simple_closed,
    symmetry_residual,
    validate_orbit,
    verify_closure,
    winding_number,
)
from .section import CrossingEvent, SectionSpec, crossing_time, first_transversal_crossing
from .shooting import (
    Bracket,
    MissValue,
    Mode,
    ShootingProblem,
    ShootingSolution,
    bracket,
    crossing_time_deviation,
    miss,
    miss_half,
    miss_quarter,
    sign_table,
    solve,
)

__version__ = "0.1.0"
