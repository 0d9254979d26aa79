"""Number-optimized Fisher information over Gaussian and coherent probes.

The mean photon number is a search variable like any other; the optimum is
finite only because saturation eventually erodes the medium's response.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.stats import qmc

from . import _kernels as K
from ._simplex import COHERENT, GAUSSIAN, polish
from .errors import BoundaryOptimum, NoConvergence
from .fisher import Target
from .medium import Medium
from .state import ProbeState, mean_photon_number, wrap_phase

OFF_RESONANT_SEED = 1.0 / math.sqrt(3.0)


class StateFamily(str, enum.Enum):
    COHERENT = "coherent"
    GAUSSIAN = "gaussian"

    @property
    def code(self) -> int:
        return COHERENT if self is StateFamily.COHERENT else GAUSSIAN

    @property
    def dim(self) -> int:
        return 3 if self is StateFamily.COHERENT else 5


class Regime(str, enum.Enum):
    SQUEEZED_VACUUM_OFF_RES = "squeezed_vacuum_off_res"
    SQUEEZED_VACUUM_RES = "squeezed_vacuum_res"
    SQUEEZED_COHERENT_OFF_RES = "squeezed_coherent_off_res"
    SQUEEZED_COHERENT_RES = "squeezed_coherent_res"
    COHERENT_OFF_RES = "coherent_off_res"
    COHERENT_RES = "coherent_res"

    @property
    def squeezed_vacuum(self) -> bool:
        return self.value.startswith("squeezed_vacuum")

    @property
    def squeezed_coherent(self) -> bool:
        return self.value.startswith("squeezed_coherent")


@dataclass(frozen=True)
class ClassificationTolerances:
    tol_R: float = 1e-6
    tol_r: float = 1e-4
    tol_delta: float = 1e-4


@dataclass(frozen=True)
class OptimizerConfig:
    n_starts: int = 32
    r_max: float = 6.0
    delta_max: float = 50.0
    nbar_max: float = 1e6
    xtol: float = 1e-10
    iterations_per_dim: int = 400
    restarts: int = 4
    agree_rtol: float = 1e-6
    min_agreeing: int = 3
    confirm_starts: int = 8
    boundary_fraction: float = 0.01
    seed: int = 20170412
    tolerances: ClassificationTolerances = field(default_factory=ClassificationTolerances)

    def __post_init__(self):
        if self.n_starts < 0 or self.min_agreeing < 1:
            raise ValueError("n_starts must be >= 0 and min_agreeing >= 1")
        for name in ("r_max", "delta_max", "nbar_max", "xtol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = dict(data)
        tol = data.pop("tolerances", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown optimizer keys: {sorted(unknown)}")
        if tol is not None:
            data["tolerances"] = ClassificationTolerances(**tol)
        return cls(**data)

    @property
    def u_max(self) -> float:
        return math.log1p(self.nbar_max)


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    state: ProbeState
    delta_bar: float
    nbar: float
    regime: Regime
    boundary_flag: bool
    starts_agreeing: int
    family: StateFamily
    target: Target
    converged_starts: int = 0
    evaluations: int = 0

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "state": self.state.as_dict(),
            "delta_bar": self.delta_bar,
            "nbar": self.nbar,
            "regime": self.regime.value,
            "boundary_flag": self.boundary_flag,
            "starts_agreeing": self.starts_agreeing,
            "converged_starts": self.converged_starts,
            "family": self.family.value,
            "target": self.target.value,
        }


@dataclass(frozen=True)
class AdvantageResult:
    i_sq: float
    i_coh: float
    advantage: float
    sq_result: OptimizationResult
    coh_result: OptimizationResult

    @property
    def boundary_flag(self) -> bool:
        return self.sq_result.boundary_flag or self.coh_result.boundary_flag

    def as_dict(self) -> dict:
        return {
            "i_sq": self.i_sq,
            "i_coh": self.i_coh,
            "advantage": self.advantage,
            "boundary_flag": self.boundary_flag,
            "sq_result": self.sq_result.as_dict(),
            "coh_result": self.coh_result.as_dict(),
        }


def classify_regime(result: OptimizationResult,
                    tol: ClassificationTolerances = ClassificationTolerances()) -> Regime:
    s = result.state
    vacuum = s.R * s.R < tol.tol_R * (1.0 + result.nbar)
    coherent = s.r < tol.tol_r
    resonant = abs(result.delta_bar) < tol.tol_delta
    if coherent:
        return Regime.COHERENT_RES if resonant else Regime.COHERENT_OFF_RES
    if vacuum:
        return Regime.SQUEEZED_VACUUM_RES if resonant else Regime.SQUEEZED_VACUUM_OFF_RES
    return Regime.SQUEEZED_COHERENT_RES if resonant else Regime.SQUEEZED_COHERENT_OFF_RES


# -- search-space plumbing ---------------------------------------------------

def _box(family: StateFamily, config: OptimizerConfig):
    if family is StateFamily.COHERENT:
        lower = np.array([0.0, -np.inf, 0.0])
        upper = np.array([config.u_max, np.inf, config.delta_max])
        step = np.array([0.5, 0.5, 0.5])
    else:
        lower = np.array([0.0, -np.inf, 0.0, -np.inf, 0.0])
        upper = np.array([config.u_max, np.inf, config.r_max, np.inf, config.delta_max])
        step = np.array([0.5, 0.5, 0.25, 0.25, 0.5])
    return lower, upper, step


def to_search(state: ProbeState, delta_bar: float, family: StateFamily) -> np.ndarray:
    u = math.log1p(state.R * state.R)
    # negative detuning maps to its mirror image, which carries the same information
    sign = -1.0 if delta_bar < 0 else 1.0
    if family is StateFamily.COHERENT:
        return np.array([u, sign * state.theta, abs(delta_bar)])
    return np.array([u, sign * state.theta, state.r, sign * state.psi, abs(delta_bar)])


def from_search(x: np.ndarray, family: StateFamily) -> tuple[ProbeState, float]:
    R = math.sqrt(math.expm1(max(x[0], 0.0)))
    if family is StateFamily.COHERENT:
        return ProbeState(R, wrap_phase(x[1]), 0.0, 0.0), float(x[2])
    return ProbeState(R, wrap_phase(x[1]), float(x[2]), wrap_phase(x[3])), float(x[4])


def _sobol_starts(family: StateFamily, config: OptimizerConfig) -> np.ndarray:
    if config.n_starts == 0:
        return np.empty((0, family.dim))
    pts = qmc.Sobol(d=family.dim, scramble=True, seed=config.seed).random(config.n_starts)
    if family is StateFamily.COHERENT:
        lo = np.array([0.0, -math.pi, 0.0])
        hi = np.array([config.u_max, math.pi, config.delta_max])
    else:
        lo = np.array([0.0, -math.pi, 0.0, -math.pi, 0.0])
        hi = np.array([config.u_max, math.pi, config.r_max, math.pi, config.delta_max])
    return lo + pts * (hi - lo)


def _best_theta(medium: Medium, target: Target, nbar: float, delta_bar: float) -> float:
    phi, _, _ = K.response(medium.T, medium.n_sat, delta_bar, nbar)
    dphi, dxi = K.response_derivatives(medium.T, medium.n_sat, delta_bar, nbar, target.code)
    return wrap_phase(phi - math.atan2(dphi, dxi))


def seed_states(medium: Medium, target: Target) -> list[tuple[ProbeState, float]]:
    """Deterministic physically motivated starting points."""
    r0 = 1.0
    n_sv = math.sinh(r0) ** 2
    seeds = []
    for delta in (0.0, OFF_RESONANT_SEED):
        phi, _, _ = K.response(medium.T, medium.n_sat, delta, n_sv)
        seeds.append((ProbeState(0.0, 0.0, r0, wrap_phase(phi - 0.1)), delta))
    n_coh = min(medium.n_sat, 1e5)
    seeds.append((ProbeState(math.sqrt(n_coh), _best_theta(medium, target, n_coh, 1.0)), 1.0))
    return seeds


# -- optimization --------------------------------------------------------------

def _start_points(medium, target, family, config, extra_seeds):
    lower, upper, _ = _box(family, config)
    points = [to_search(s, d, family) for s, d in seed_states(medium, target)]
    for seed in extra_seeds or ():
        if seed is None:
            continue
        state, delta = (seed.state, seed.delta_bar) if isinstance(seed, OptimizationResult) else seed
        points.append(to_search(state, delta, family))
    points.extend(_sobol_starts(family, config))
    return [np.clip(p, lower, upper) for p in points]


def _descend(x0, family, target, medium, config):
    lower, upper, step = _box(family, config)
    return polish(np.asarray(x0, dtype=float), step, lower, upper, family.code, target.code,
                  float(medium.T), float(medium.n_sat), config.xtol,
                  config.iterations_per_dim * family.dim, config.restarts)


def _confirm_points(x_best, family, config, count):
    """Deterministic perturbations around the incumbent for restart checks."""
    _, _, step = _box(family, config)
    offsets = qmc.Sobol(d=family.dim, scramble=True, seed=config.seed + 1).random(max(count, 1))
    return [x_best + (2.0 * o - 1.0) * step for o in offsets[:count]]


def optimize(medium: Medium, target: Target, family: StateFamily,
             config: OptimizerConfig = OptimizerConfig(), extra_seeds=None,
             raise_on_boundary: bool = True) -> OptimizationResult:
    """Maximize the Fisher information over the probe and the working detuning.

    ``extra_seeds`` holds ``OptimizationResult`` objects or ``(state, delta)``
    pairs used as additional starts. Raises ``BoundaryOptimum`` (carrying the
    result) when the best point sits on an upper search bound, unless
    ``raise_on_boundary`` is false, in which case the flag is only recorded.
    """
    target = Target.parse(target)
    family = StateFamily(family)
    runs = [_descend(x0, family, target, medium, config)
            for x0 in _start_points(medium, target, family, config, extra_seeds)]

    def agreeing(fbest):
        tol = -math.log1p(-config.agree_rtol)
        return sum(1 for _, f, _, _ in runs if math.isfinite(f) and f - fbest <= tol)

    best = min(runs, key=lambda run: run[1])
    if agreeing(best[1]) < config.min_agreeing and config.confirm_starts:
        for x0 in _confirm_points(best[0], family, config, config.confirm_starts):
            runs.append(_descend(np.clip(x0, *_box(family, config)[:2]), family, target,
                                 medium, config))
        best = min(runs, key=lambda run: run[1])

    converged = sum(1 for run in runs if run[3])
    if converged == 0 or not math.isfinite(best[1]):
        raise NoConvergence(f"no start converged for {medium} ({family.value}, {target.value})")
    n_agree = agreeing(best[1])
    if n_agree < config.min_agreeing:
        raise NoConvergence(
            f"only {n_agree} starts reached the best value for {medium} "
            f"({family.value}, {target.value}); need {config.min_agreeing}")

    x = best[0]
    state, delta = from_search(x, family)
    value = float(math.exp(-best[1]))
    _, upper, _ = _box(family, config)
    watched = [0, 2] if family is StateFamily.COHERENT else [0, 2, 4]
    boundary = any(x[i] >= (1.0 - config.boundary_fraction) * upper[i] for i in watched)
    result = OptimizationResult(
        value=value, state=state, delta_bar=delta, nbar=mean_photon_number(state),
        regime=Regime.COHERENT_RES, boundary_flag=boundary, starts_agreeing=n_agree,
        family=family, target=target, converged_starts=converged,
        evaluations=int(sum(run[2] for run in runs)))
    result = replace(result, regime=classify_regime(result, config.tolerances))
    if boundary and raise_on_boundary:
        raise BoundaryOptimum(
            f"{family.value} optimum for {medium} ({target.value}) sits on a search bound",
            result)
    return result


def quantum_advantage(medium: Medium, target: Target, config: OptimizerConfig = OptimizerConfig(),
                      extra_seeds=None, raise_on_boundary: bool = True) -> AdvantageResult:
    """Ratio of the Gaussian-family optimum to the coherent-family optimum.

    ``extra_seeds`` may be an ``AdvantageResult`` or a sequence of them
    (warm starts from neighbouring media).
    """
    target = Target.parse(target)
    if isinstance(extra_seeds, AdvantageResult):
        extra_seeds = [extra_seeds]
    neighbours = [s for s in (extra_seeds or ()) if s is not None]
    coh_seeds = [n.coh_result for n in neighbours] + [n.sq_result for n in neighbours]
    coh = optimize(medium, target, StateFamily.COHERENT, config, coh_seeds, raise_on_boundary=False)
    sq_seeds = [coh] + [n.sq_result for n in neighbours] + [n.coh_result for n in neighbours]
    sq = optimize(medium, target, StateFamily.GAUSSIAN, config, sq_seeds, raise_on_boundary=False)
    if sq.value < coh.value * (1.0 - 1e-6):
        # the coherent optimum is a feasible Gaussian point; descend from it directly
        sq = optimize(medium, target, StateFamily.GAUSSIAN, replace(config, n_starts=0), [coh],
                      raise_on_boundary=False)
    result = AdvantageResult(sq.value, coh.value, sq.value / coh.value, sq, coh)
    if result.boundary_flag and raise_on_boundary:
        which = [name for name, r in (("gaussian", sq), ("coherent", coh)) if r.boundary_flag]
        raise BoundaryOptimum(f"{'/'.join(which)} optimum for {medium} ({target.value}) "
                              "sits on a search bound", result)
    return result
