"""Fisher information of homodyne (X quadrature) outcomes after the medium.

The outcome density is Gaussian, so the information splits into a mean term
``mu'^2 / v`` and a variance term ``v'^2 / (2 v^2)``. Derivatives are taken
with respect to detuning (per gamma_0^2) or optical depth, holding every
probe parameter and the input photon number fixed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import IntegrationDidNotConverge, NonFiniteField, NonPositiveVariance
from .medium import Medium, output_quadrature_stats
from .state import ProbeState

FD_EPS = np.finfo(float).eps ** (1.0 / 3.0)
# step for the Richardson-refined score inside the quadrature oracle (error ~ h^4 + eps/h)
ORACLE_EPS = np.finfo(float).eps ** (1.0 / 5.0)


class Target(str, enum.Enum):
    DETUNING = "detuning"
    OPTICAL_DEPTH = "od"

    @property
    def code(self) -> int:
        return K.DETUNING if self is Target.DETUNING else K.OPTICAL_DEPTH

    @classmethod
    def parse(cls, value) -> "Target":
        if isinstance(value, cls):
            return value
        aliases = {"detuning": cls.DETUNING, "delta": cls.DETUNING,
                   "od": cls.OPTICAL_DEPTH, "optical_depth": cls.OPTICAL_DEPTH}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown target {value!r}; expected 'detuning' or 'od'") from None


@dataclass(frozen=True)
class FisherBreakdown:
    value: float
    mean_term: float
    var_term: float

    def as_dict(self) -> dict:
        return {"value": self.value, "mean_term": self.mean_term, "var_term": self.var_term}


def gaussian_fisher(mu: float, v: float, dmu: float, dv: float) -> FisherBreakdown:
    """Fisher information of Normal(mu(Y), v(Y)) given the derivatives in Y.

    ``mu`` only enters through ``dmu``; it is accepted to keep call sites
    symmetric with the statistics they come from.
    """
    for name, x in (("mu", mu), ("v", v), ("dmu", dmu), ("dv", dv)):
        if not math.isfinite(x):
            raise NonFiniteField(f"{name} must be finite, got {x}")
    if v <= 0.0:
        raise NonPositiveVariance(f"variance must be > 0, got {v}")
    mean_term = dmu * dmu / v
    var_term = dv * dv / (2.0 * v * v)
    return FisherBreakdown(mean_term + var_term, mean_term, var_term)


def central_difference(f, x: float, richardson: bool = True) -> float:
    """Central difference with step ``max(|x|, 1) eps^(1/3)`` and one Richardson pass."""
    h = max(abs(x), 1.0) * FD_EPS

    def d(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    coarse = d(h)
    if not richardson:
        return coarse
    return (4.0 * d(0.5 * h) - coarse) / 3.0


class ProbeModel:
    """Output statistics as a function of the target parameter ``y``.

    ``y`` is the detuning for ``Target.DETUNING`` and the optical depth for
    ``Target.OPTICAL_DEPTH``; everything else is frozen at construction.
    Methods accept scalars or numpy arrays for ``y``.
    """

    def __init__(self, state: ProbeState, medium: Medium, delta_bar: float, target: Target):
        self.state = state
        self.medium = medium
        self.delta_bar = float(delta_bar)
        self.target = Target.parse(target)
        self.value = self.delta_bar if self.target is Target.DETUNING else float(medium.T)

    def _args(self, y):
        s = self.state
        y = np.asarray(y, dtype=float) if np.ndim(y) else float(y)
        if self.target is Target.DETUNING:
            T, delta = float(self.medium.T), y
        else:
            T, delta = y, self.delta_bar
        return float(s.R), float(s.theta), float(s.r), float(s.psi), T, float(self.medium.n_sat), delta

    def stats(self, y):
        return K.output_stats(*self._args(y))

    def derivatives(self, y):
        return K.output_derivatives(*self._args(y), self.target.code)


class NormalLocation:
    """Normal(y, 1); Fisher information 1."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def stats(self, y):
        y = np.asarray(y, dtype=float)
        return y, np.ones_like(y)

    def derivatives(self, y):
        one = np.ones_like(np.asarray(y, dtype=float))
        return one, np.zeros_like(one)


class NormalLogVariance:
    """Normal(0, e^{2y}); Fisher information 2."""

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def stats(self, y):
        v = np.exp(2.0 * np.asarray(y, dtype=float))
        return 0.0 * v, v

    def derivatives(self, y):
        v = np.exp(2.0 * np.asarray(y, dtype=float))
        return 0.0 * v, 2.0 * v


def model_derivatives(state: ProbeState, medium: Medium, delta_bar: float, target: Target,
                      mode: str = "analytic") -> tuple[float, float]:
    """``(dmu, dv)`` of the output statistics with respect to ``target``."""
    model = ProbeModel(state, medium, delta_bar, target)
    if mode == "analytic":
        dmu, dv = model.derivatives(model.value)
        return float(dmu), float(dv)
    if mode == "finite_difference":
        dmu = central_difference(lambda y: float(model.stats(y)[0]), model.value)
        dv = central_difference(lambda y: float(model.stats(y)[1]), model.value)
        return float(dmu), float(dv)
    raise ValueError(f"unknown derivative mode {mode!r}")


def fisher_information(state: ProbeState, medium: Medium, delta_bar: float,
                       target: Target) -> FisherBreakdown:
    out = output_quadrature_stats(state, medium, delta_bar)
    dmu, dv = model_derivatives(state, medium, delta_bar, target)
    return gaussian_fisher(out.mu, out.v, dmu, dv)


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Gauss-Legendre rule over ``mu +/- half_width_sd * sqrt(v)``."""

    half_width_sd: float = 12.0
    panels: int = 16
    order: int = 8
    rtol: float = 1e-9
    max_refinements: int = 8


def numeric_fisher(model, y: float | None = None, grid: QuadratureGrid = QuadratureGrid()) -> float:
    """Integrate ``E[(d/dy ln p(m|y))^2]`` for a Gaussian outcome model.

    Only ``model.stats`` is used: the score comes from central differences of
    the log density in ``y``, never from the analytic derivatives.
    """
    y = model.value if y is None else float(y)
    mu, v = (float(a) for a in model.stats(y))
    if grid.half_width_sd < 6.0:
        raise ValueError("integration window must span at least 12 standard deviations")
    h = max(abs(y), 1.0) * ORACLE_EPS
    half = grid.half_width_sd * math.sqrt(v)
    nodes, weights = np.polynomial.legendre.leggauss(grid.order)

    def log_ratio(x, y_hi, y_lo):
        # ln p(m|y_hi) - ln p(m|y_lo) as an exact quadratic in x = m - mu, so
        # rounding enters through the coefficients only and the integrand is smooth
        a, va = (float(t) for t in model.stats(y_hi))
        b, vb = (float(t) for t in model.stats(y_lo))
        a, b = a - mu, b - mu
        quad = 1.0 / va - 1.0 / vb
        lin = a / va - b / vb
        const = a * a / va - b * b / vb + math.log(va / vb)
        return -0.5 * (quad * x * x - 2.0 * lin * x + const)

    def integrate(panels):
        edges = np.linspace(-half, half, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        rad = 0.5 * (edges[1:] - edges[:-1])[:, None]
        x = (mid + rad * nodes).ravel()
        w = (rad * weights).ravel()
        d1 = log_ratio(x, y + h, y - h) / (2.0 * h)
        d2 = log_ratio(x, y + 0.5 * h, y - 0.5 * h) / h
        score = (4.0 * d2 - d1) / 3.0
        density = np.exp(-0.5 * x * x / v) / math.sqrt(2.0 * math.pi * v)
        return float(np.sum(w * density * score * score))

    panels = grid.panels
    previous = integrate(panels)
    for _ in range(grid.max_refinements):
        panels *= 2
        current = integrate(panels)
        if abs(current - previous) <= grid.rtol * max(abs(current), 1e-300):
            return current
        previous = current
    raise IntegrationDidNotConverge(
        f"quadrature did not settle to rtol={grid.rtol} after {grid.max_refinements} refinements")


def numeric_fi_oracle(state: ProbeState, medium: Medium, delta_bar: float, target: Target,
                      grid: QuadratureGrid = QuadratureGrid()) -> float:
    return numeric_fisher(ProbeModel(state, medium, delta_bar, target), grid=grid)

