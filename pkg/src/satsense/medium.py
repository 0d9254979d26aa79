"""Saturable resonant absorber acting on a single optical mode.

Frequencies are in units of the unbroadened linewidth, so detunings are
``delta_bar = Delta / gamma_0`` and ``gamma_0 = 1``. The response is

    phi + i xi = (T / 2) (delta_bar + i) / (delta_bar^2 + gamma_bar^2),

with the power-broadened linewidth ``gamma_bar^2 = 1 + nbar / n_sat`` set by
the mean photon number of the *input* state. The transmitted mode is the
input rotated by ``phi``, attenuated by ``e^{-xi}`` and mixed with a vacuum
reservoir mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidMedium, NegativePhotonNumber, NonFiniteField
from .state import ProbeState, QuadratureStats, input_quadrature_stats, mean_photon_number


@dataclass(frozen=True)
class Medium:
    """On-resonance optical depth ``T`` and saturation photon number ``n_sat``."""

    T: float
    n_sat: float

    def __post_init__(self):
        for name in ("T", "n_sat"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidMedium(f"{name} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class Response:
    phi: float
    xi: float
    gamma_bar: float

    @property
    def transmission(self) -> float:
        """Power transmission ``e^{-2 xi}``."""
        return math.exp(-2.0 * self.xi)


def power_broadened_linewidth(medium: Medium, nbar: float) -> float:
    if not math.isfinite(nbar):
        raise NonFiniteField(f"photon number must be finite, got {nbar}")
    if nbar < 0.0:
        raise NegativePhotonNumber(f"photon number must be >= 0, got {nbar}")
    return math.sqrt(1.0 + nbar / medium.n_sat)


def complex_response(medium: Medium, delta_bar: float, nbar: float) -> Response:
    gamma_bar = power_broadened_linewidth(medium, nbar)
    denom = delta_bar * delta_bar + gamma_bar * gamma_bar
    half_T = 0.5 * medium.T
    return Response(half_T * delta_bar / denom, half_T / denom, gamma_bar)


def transmit(stats: QuadratureStats, xi: float) -> QuadratureStats:
    """Pure-loss channel with amplitude transmission ``e^{-xi}``."""
    loss = math.exp(-2.0 * xi)
    return QuadratureStats(stats.mu * math.exp(-xi), 1.0 + (stats.v - 1.0) * loss)


def output_quadrature_stats(state: ProbeState, medium: Medium, delta_bar: float) -> QuadratureStats:
    """Statistics of the X quadrature after the medium."""
    resp = complex_response(medium, delta_bar, mean_photon_number(state))
    return transmit(input_quadrature_stats(state, resp.phi), resp.xi)
