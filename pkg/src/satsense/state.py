"""Single-mode Gaussian probe states D(alpha) S(zeta)|0> and their X_phi statistics.

Quadratures are normalized so the vacuum variance is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NegativeMagnitude, NonFiniteField, NonPositiveVariance


def wrap_phase(angle: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    wrapped -= math.pi
    # fmod can land exactly on +pi after the shift back
    return -math.pi if wrapped >= math.pi else wrapped


@dataclass(frozen=True)
class ProbeState:
    """Displacement ``alpha = R e^{i theta}`` and squeezing ``zeta = r e^{2 i psi}``."""

    R: float = 0.0
    theta: float = 0.0
    r: float = 0.0
    psi: float = 0.0

    @classmethod
    def coherent(cls, R: float, theta: float = 0.0) -> "ProbeState":
        return cls(R=R, theta=theta)

    @classmethod
    def squeezed_vacuum(cls, r: float, psi: float = 0.0) -> "ProbeState":
        return cls(r=r, psi=psi)

    def as_dict(self) -> dict:
        return {"R": self.R, "theta": self.theta, "r": self.r, "psi": self.psi}


@dataclass(frozen=True)
class QuadratureStats:
    mu: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.v)):
            raise NonFiniteField(f"non-finite quadrature statistics ({self.mu}, {self.v})")
        if self.v <= 0.0:
            raise NonPositiveVariance(f"variance must be > 0, got {self.v}")


def validate_state(state: ProbeState, absorb_signs: bool = False) -> ProbeState:
    """Return the canonical form of ``state`` or raise.

    Phases are wrapped into [-pi, pi). A negative magnitude is an error
    unless ``absorb_signs`` is set, in which case the sign is moved into the
    matching phase (``R -> -R`` is ``theta + pi``; ``r -> -r`` is ``psi + pi/2``).
    """
    fields = state.as_dict()
    for name, value in fields.items():
        if not math.isfinite(value):
            raise NonFiniteField(f"{name} must be finite, got {value}")
    R, theta, r, psi = state.R, state.theta, state.r, state.psi
    if R < 0.0:
        if not absorb_signs:
            raise NegativeMagnitude(f"R must be >= 0, got {R}")
        R, theta = -R, theta + math.pi
    if r < 0.0:
        if not absorb_signs:
            raise NegativeMagnitude(f"r must be >= 0, got {r}")
        r, psi = -r, psi + 0.5 * math.pi
    if not math.isfinite(mean_photon_number_raw(R, r)):
        raise NonFiniteField("mean photon number overflows")
    return ProbeState(float(R), wrap_phase(theta), float(r), wrap_phase(psi))


def mean_photon_number_raw(R: float, r: float) -> float:
    try:
        return R * R + math.sinh(r) ** 2
    except OverflowError:
        return math.inf


def mean_photon_number(state: ProbeState) -> float:
    """<a^dagger a> = R^2 + sinh^2 r."""
    return mean_photon_number_raw(state.R, state.r)


def input_quadrature_stats(state: ProbeState, angle: float) -> QuadratureStats:
    """Mean and variance of ``X_angle = a e^{-i angle} + a^dagger e^{i angle}``."""
    mu = 2.0 * state.R * math.cos(angle - state.theta)
    # e^{-2r} cos^2 + e^{2r} sin^2 without cancellation; r = 0 gives exactly 1
    v = math.exp(-2.0 * state.r) + 2.0 * math.sinh(2.0 * state.r) * math.sin(angle - state.psi) ** 2
    return QuadratureStats(mu, v)
