"""Homodyne Monte Carlo: empirical Fisher information and Cramer-Rao checks.

Randomness comes from Philox, a counter-based generator. Repetition ``k`` of
a run seeded with ``seed`` draws from the stream keyed by
``SeedSequence([seed, k])``, so repetitions can run in any order or in
parallel. Normals are drawn by inverse CDF from 53-bit uniforms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import BracketExcludesOptimum, NonPositiveVariance
from .fisher import ProbeModel, Target
from .medium import Medium
from .state import ProbeState, QuadratureStats

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SimConfig:
    n_samples: int
    n_repetitions: int = 1
    seed: int = 0
    target: Target = Target.DETUNING
    true_value: float | None = None
    bracket: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_samples < 1 or self.n_repetitions < 1:
            raise ValueError("n_samples and n_repetitions must be >= 1")
        if self.bracket is not None and self.true_value is not None:
            lo, hi = self.bracket
            if not lo < self.true_value < hi:
                raise ValueError(f"bracket {self.bracket} does not contain {self.true_value}")


@dataclass(frozen=True)
class EstimatorReport:
    empirical_fisher: float
    empirical_fisher_se: float
    analytic_fisher: float
    mle_variance: float
    mle_variance_se: float
    mle_mean: float
    crb_ratio: float
    crb_ratio_se: float
    score_mean: float
    score_mean_se: float
    n_samples: int
    n_repetitions: int
    edge_fraction: float
    seed: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    # (k + 1/2) / 2^53 keeps the uniforms strictly inside (0, 1)
    bits = rng.integers(0, 1 << 53, size=n, dtype=np.int64)
    return ndtri((bits + 0.5) * 2.0 ** -53)


def sample_homodyne(stats: QuadratureStats, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """``n`` draws of the X quadrature outcome, Normal(mu, v)."""
    if not stats.v > 0:
        raise NonPositiveVariance(f"variance must be > 0, got {stats.v}")
    if n == 0:
        return np.empty(0)
    return stats.mu + math.sqrt(stats.v) * standard_normals(substream(seed, stream), n)


def scores(model, samples: np.ndarray, y: float | None = None) -> np.ndarray:
    """Per-sample ``d/dy ln p(m | y)`` from the analytic mean/variance derivatives."""
    y = model.value if y is None else y
    mu, v = (float(a) for a in model.stats(y))
    dmu, dv = (float(a) for a in model.derivatives(y))
    dev = samples - mu
    return dev * dmu / v + (dev * dev - v) * dv / (2.0 * v * v)


def _model_for(state, medium, delta_bar, target, model):
    return model if model is not None else ProbeModel(state, medium, delta_bar, target)


def empirical_fisher(state: ProbeState | None, medium: Medium | None, delta_bar: float | None,
                     target: Target, sim: SimConfig, model=None) -> tuple[float, float]:
    """Mean squared score over ``sim.n_samples`` draws, with its standard error.

    Passing ``model`` (e.g. ``NormalLocation()``) bypasses the medium.
    """
    model = _model_for(state, medium, delta_bar, target, model)
    mu, v = (float(a) for a in model.stats(model.value))
    samples = sample_homodyne(QuadratureStats(mu, v), sim.n_samples, sim.seed)
    sq = scores(model, samples) ** 2
    se = float(np.std(sq, ddof=1) / math.sqrt(sq.size)) if sq.size > 1 else math.nan
    return float(np.mean(sq)), se


def _golden_mle(model, samples: np.ndarray, lo: float, hi: float, rtol: float = 1e-10) -> np.ndarray:
    """Vectorized golden-section minimization of the Gaussian NLL, one row per experiment."""
    reps = samples.shape[0]
    n = samples.shape[1]
    sum1 = samples.sum(axis=1)
    sum2 = (samples * samples).sum(axis=1)

    def nll(y):
        mu, v = model.stats(y)
        # sum_i (m_i - mu)^2 = sum2 - 2 mu sum1 + n mu^2
        return 0.5 * (sum2 - 2.0 * mu * sum1 + n * mu * mu) / v + 0.5 * n * np.log(v)

    a = np.full(reps, float(lo))
    b = np.full(reps, float(hi))
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = nll(c), nll(d)
    iterations = int(math.ceil(math.log(rtol) / math.log(GOLDEN)))
    for _ in range(iterations):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - GOLDEN * (b - a)
        new_d = a + GOLDEN * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        f_eval = nll(np.where(left, new_c, new_d))
        fc, fd = np.where(left, f_eval, fd), np.where(left, fc, f_eval)
        c, d = c_next, d_next
    return 0.5 * (a + b)


def _experiments(model, mu, v, sim, first, count):
    z = np.stack([standard_normals(substream(sim.seed, 1 + k), sim.n_samples)
                  for k in range(first, first + count)])
    return mu + math.sqrt(v) * z


def crb_check(state: ProbeState | None, medium: Medium | None, delta_bar: float | None,
              target: Target, sim: SimConfig, model=None, threads: int | None = 1,
              chunk: int = 1000) -> EstimatorReport:
    """Compare the spread of maximum-likelihood estimates with the Cramer-Rao bound.

    Repetition ``k`` uses substream ``k + 1``; substream 0 is reserved for the
    single large sample behind ``empirical_fisher``.
    """
    model = _model_for(state, medium, delta_bar, target, model)
    y0 = model.value
    mu, v = (float(a) for a in model.stats(y0))
    dmu, dv = (float(a) for a in model.derivatives(y0))
    analytic = dmu * dmu / v + dv * dv / (2.0 * v * v)
    if not analytic > 0:
        raise ValueError("analytic Fisher information vanishes at the true value")
    if sim.bracket is None:
        half = 10.0 / math.sqrt(sim.n_samples * analytic)
        lo, hi = y0 - half, y0 + half
    else:
        lo, hi = sim.bracket
    if not lo < y0 < hi:
        raise ValueError(f"bracket ({lo}, {hi}) does not contain the true value {y0}")

    def run(first):
        count = min(chunk, sim.n_repetitions - first)
        samples = _experiments(model, mu, v, sim, first, count)
        return _golden_mle(model, samples, lo, hi)

    starts = list(range(0, sim.n_repetitions, chunk))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    est = np.concatenate(parts)

    width = hi - lo
    edge = float(np.mean((est - lo < 1e-6 * width) | (hi - est < 1e-6 * width)))
    reps = est.size
    var = float(np.var(est, ddof=1)) if reps > 1 else math.nan
    # standard error of the sample variance from the fourth central moment
    dev = est - est.mean()
    m4 = float(np.mean(dev ** 4))
    var_se = math.sqrt(max(m4 - var * var * (reps - 3) / (reps - 1), 0.0) / reps) if reps > 3 else math.nan
    ratio = 1.0 / (sim.n_samples * var * analytic)
    ratio_se = ratio * var_se / var

    fisher_hat, fisher_se = empirical_fisher(None, None, None, target, sim, model=model)
    sc = scores(model, sample_homodyne(QuadratureStats(mu, v), sim.n_samples, sim.seed))
    score_mean = float(np.mean(sc)) if sc.size else math.nan
    score_se = float(np.std(sc, ddof=1) / math.sqrt(sc.size)) if sc.size > 1 else math.nan

    report = EstimatorReport(
        empirical_fisher=fisher_hat, empirical_fisher_se=fisher_se, analytic_fisher=analytic,
        mle_variance=var, mle_variance_se=var_se, mle_mean=float(est.mean()),
        crb_ratio=ratio, crb_ratio_se=ratio_se, score_mean=score_mean, score_mean_se=score_se,
        n_samples=sim.n_samples, n_repetitions=sim.n_repetitions, edge_fraction=edge,
        seed=sim.seed)
    if edge > 0.01:
        raise BracketExcludesOptimum(
            f"{100 * edge:.1f}% of estimates sit on the bracket edge ({lo}, {hi})", report)
    return report
