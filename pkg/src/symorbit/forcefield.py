"""Planar power-law force fields with parametrized symmetric perturbations.

The unperturbed field is the attractive power law a(r) = -kappa * r / |r|^(alpha+2).
A perturbation family, scaled by the parameter mu, is added on top; each family
declares which axis reflections it commutes with, and the declaration can be
checked numerically against samples.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainExit, SymmetryViolation


class Reflection(enum.Enum):
    """Axis reflections of the plane.

    X_AXIS maps (x, y) -> (x, -y); Y_AXIS maps (x, y) -> (-x, y).
    """

    X_AXIS = "x_axis"
    Y_AXIS = "y_axis"

    def apply(self, p):
        p = np.asarray(p, dtype=float)
        if self is Reflection.X_AXIS:
            return np.array([p[0], -p[1]])
        return np.array([-p[0], p[1]])


@dataclass(frozen=True)
class PowerLawParams:
    """Strength and exponent of the unperturbed attraction."""

    kappa: float
    alpha: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be nonnegative, got {self.alpha}")


def potential(params: PowerLawParams, r: float) -> float:
    """Radial potential of the power-law field; logarithmic when alpha == 0."""
    if r <= 0:
        raise ValueError("potential requires r > 0")
    if params.alpha == 0:
        return params.kappa * math.log(r)
    gamma = params.kappa / params.alpha
    return -gamma / r**params.alpha


def potential_derivatives(params: PowerLawParams, r: float) -> tuple[float, float]:
    """(U'(r), U''(r)); U' > 0 everywhere for an attractive field."""
    if r <= 0:
        raise ValueError("potential_derivatives requires r > 0")
    a = params.alpha
    u1 = params.kappa / r ** (a + 1.0)
    u2 = -params.kappa * (a + 1.0) / r ** (a + 2.0)
    return u1, u2


def circular_speed(params: PowerLawParams, p: float) -> float:
    """Speed of the circular solution of radius p: sqrt(p * U'(p)).

    Independent of p when alpha == 0.
    """
    if p <= 0:
        raise ValueError("circular_speed requires p > 0")
    u1, _ = potential_derivatives(params, p)
    return math.sqrt(p * u1)


# Parity rules per built-in perturbation family: symmetry holds iff the
# listed predicate on the family parameters is true.
_FAMILIES = ("zero", "radial_power", "axis_poly", "uniform")


@dataclass(frozen=True)
class PerturbationSpec:
    """One member of the built-in perturbation menu, scaled by mu at evaluation.

    kind:
      zero          no perturbation
      radial_power  -lam * r / |r|^(beta+2)       (central, both symmetries)
      axis_poly     (cx * x**px, cy * y**py)      (parities set the symmetries)
      uniform       constant vector (ux, uy)      (test family)

    declared_symmetries is what the caller claims; check_symmetry verifies it
    numerically, so a wrong declaration is constructible on purpose.
    """

    kind: str = "zero"
    params: dict = field(default_factory=dict)
    declared_symmetries: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in _FAMILIES:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        syms = frozenset(
            Reflection(s) if not isinstance(s, Reflection) else s
            for s in self.declared_symmetries
        )
        object.__setattr__(self, "declared_symmetries", syms)
        if self.kind == "axis_poly":
            for key in ("px", "py"):
                v = self.params.get(key, 3)
                if v != int(v) or v < 0:
                    raise ValueError(f"axis_poly exponent {key} must be a nonnegative integer")

    def term(self, x: float, y: float) -> tuple[float, float]:
        """Unscaled perturbation vector at (x, y); multiply by mu for the force."""
        if self.kind == "zero":
            return 0.0, 0.0
        if self.kind == "radial_power":
            lam = self.params.get("lam", 1.0)
            beta = self.params.get("beta", 3.0)
            r = math.hypot(x, y)
            s = -lam / r ** (beta + 2.0)
            return s * x, s * y
        if self.kind == "axis_poly":
            cx = self.params.get("cx", 0.0)
            cy = self.params.get("cy", 0.0)
            px = int(self.params.get("px", 3))
            py = int(self.params.get("py", 3))
            return cx * x**px, cy * y**py
        # uniform
        return self.params.get("ux", 0.0), self.params.get("uy", 0.0)


def radial_power_perturbation(lam: float = 1.0, beta: float = 3.0) -> PerturbationSpec:
    """Central perturbation; commutes with both reflections."""
    return PerturbationSpec(
        kind="radial_power",
        params={"lam": lam, "beta": beta},
        declared_symmetries=frozenset({Reflection.X_AXIS, Reflection.Y_AXIS}),
    )


def axis_poly_perturbation(cx=0.0, px=3, cy=0.0, py=3) -> PerturbationSpec:
    """(cx*x^px, cy*y^py) with symmetries inferred from the exponent parities.

    The y-component is odd in y iff py is odd, which is exactly x-axis
    equivariance for this family; likewise px odd gives y-axis equivariance.
    """
    syms = set()
    if py % 2 == 1 or cy == 0.0:
        syms.add(Reflection.X_AXIS)
    if px % 2 == 1 or cx == 0.0:
        syms.add(Reflection.Y_AXIS)
    return PerturbationSpec(
        kind="axis_poly",
        params={"cx": cx, "px": px, "cy": cy, "py": py},
        declared_symmetries=frozenset(syms),
    )


def zero_perturbation() -> PerturbationSpec:
    return PerturbationSpec(
        kind="zero",
        declared_symmetries=frozenset({Reflection.X_AXIS, Reflection.Y_AXIS}),
    )


@dataclass(frozen=True)
class ForceField:
    """Power-law base plus mu-scaled perturbation, valid on an annulus.

    The annulus must exclude the origin and mu_range is the half-width a of
    the symmetric parameter interval (-a, a).
    """

    base: PowerLawParams
    perturbation: PerturbationSpec = field(default_factory=zero_perturbation)
    mu_range: float = 0.5
    annulus: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        r_in, r_out = self.annulus
        if not (0 < r_in < r_out):
            raise ValueError(f"annulus must satisfy 0 < r_in < r_out, got {self.annulus}")
        if not self.mu_range > 0:
            raise ValueError("mu_range half-width must be positive")

    @property
    def symmetries(self) -> frozenset:
        return self.perturbation.declared_symmetries

    def contains(self, x: float, y: float) -> bool:
        r = math.hypot(x, y)
        return self.annulus[0] <= r <= self.annulus[1]

    def acceleration(self, x: float, y: float, mu: float) -> tuple[float, float]:
        """Raw force evaluation, no annulus check (used by integrator stages)."""
        r = math.hypot(x, y)
        s = -self.base.kappa / r ** (self.base.alpha + 2.0)
        px, py = self.perturbation.term(x, y)
        return s * x + mu * px, s * y + mu * py


def eval_force(field_: ForceField, r, mu: float) -> np.ndarray:
    """Force at position r for parameter mu; errors if r is outside the annulus."""
    r = np.asarray(r, dtype=float)
    if abs(mu) > field_.mu_range:
        raise ValueError(f"mu={mu} outside (-{field_.mu_range}, {field_.mu_range})")
    if not field_.contains(r[0], r[1]):
        raise DomainExit(
            f"position {tuple(r)} outside annulus {field_.annulus}", state=r
        )
    ax, ay = field_.acceleration(r[0], r[1], mu)
    return np.array([ax, ay])


def check_symmetry(
    field_: ForceField,
    mu: float,
    sample_count: int = 64,
    seed: int = 0,
    tol: float = 1e-10,
) -> dict:
    """Max residual |f(phi p) - phi f(p)| per declared reflection, over random samples.

    Raises SymmetryViolation when a declared reflection fails beyond tol;
    built-in families with honest declarations sit at round-off.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    r_in, r_out = field_.annulus
    radii = rng.uniform(r_in, r_out, sample_count)
    angles = rng.uniform(0.0, 2.0 * math.pi, sample_count)
    pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])

    residuals = {}
    for refl in sorted(field_.symmetries, key=lambda s: s.value):
        worst = 0.0
        for p in pts:
            q = refl.apply(p)
            f_q = np.array(field_.acceleration(q[0], q[1], mu))
            f_p = np.array(field_.acceleration(p[0], p[1], mu))
            worst = max(worst, float(np.linalg.norm(f_q - refl.apply(f_p))))
        residuals[refl] = worst

    bad = {k.value: v for k, v in residuals.items() if v > tol}
    if bad:
        raise SymmetryViolation(
            f"declared symmetry violated beyond tol={tol}: {bad}", residuals=residuals
        )
    return residuals


def field_from_config(cfg: dict) -> ForceField:
    """Build a ForceField from the JSON configuration layout.

    Expected keys: kappa, alpha, perturbation{kind, params, symmetries},
    mu_range (half-width), annulus [r_in, r_out]. Missing perturbation means
    the pure power law; missing annulus defaults to [0.5, 2.0] scaled by
    cfg["radius_scale"] if present.
    """
    base = PowerLawParams(kappa=float(cfg["kappa"]), alpha=float(cfg["alpha"]))
    pcfg = cfg.get("perturbation")
    if pcfg is None:
        pert = zero_perturbation()
    else:
        pert = PerturbationSpec(
            kind=pcfg.get("kind", "zero"),
            params=dict(pcfg.get("params", {})),
            declared_symmetries=frozenset(pcfg.get("symmetries", [])),
        )
    scale = float(cfg.get("radius_scale", 1.0))
    annulus = tuple(cfg.get("annulus", (0.5 * scale, 2.0 * scale)))
    return ForceField(
        base=base,
        perturbation=pert,
        mu_range=float(cfg.get("mu_range", 0.5)),
        annulus=annulus,
    )


def field_from_json(path) -> ForceField:
    with open(path, "r", encoding="utf-8") as fh:
        return field_from_config(json.load(fh))
