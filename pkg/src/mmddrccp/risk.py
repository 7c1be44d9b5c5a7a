"""Empirical tail-risk estimators and Monte-Carlo evaluation of solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintModel, evaluate_many
from .samples import SampleSet, as_sample_set


@dataclass(frozen=True)
class EvalReport:
    """Out-of-sample summary of a solved decision."""

    cvar_out: float
    var_out: float
    violation_prob: float
    n_eval: int
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.violation_prob <= 1.0):
            raise ValueError("violation_prob must lie in [0, 1]")
        if self.var_out > self.cvar_out + 1e-9:
            raise ValueError("var_out cannot exceed cvar_out")


def empirical_cvar(values, alpha: float) -> float:
    """Average of the upper alpha-tail, with fractional weight on the
    boundary atom; equals inf_t (1/alpha) mean([v + t]_+) - t exactly."""
    vals = np.asarray(values, dtype=float).reshape(-1)
    if vals.size == 0:
        raise ValueError("empirical_cvar needs at least one value")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    n = vals.size
    m = alpha * n
    k = int(math.floor(m))
    desc = np.sort(vals)[::-1]
    tail = float(desc[:k].sum())
    if k < n:
        tail += (m - k) * float(desc[k])
    return tail / m


def empirical_var(values, alpha: float) -> float:
    """Smallest t with at least a (1 - alpha) fraction of values <= t:
    the order statistic at 1-based index ceil((1 - alpha) n)."""
    vals = np.asarray(values, dtype=float).reshape(-1)
    if vals.size == 0:
        raise ValueError("empirical_var needs at least one value")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    n = vals.size
    idx = math.ceil((1.0 - alpha) * n - 1e-9)
    idx = min(max(idx, 1), n)
    return float(np.sort(vals)[idx - 1])


def violation_probability(model: ConstraintModel, x, eval_sample) -> float:
    """Fraction of evaluation samples with f(x, xi) > 0."""
    eval_sample = as_sample_set(eval_sample)
    return float(np.mean(evaluate_many(model, x, eval_sample.points) > 0.0))


def sample_gaussian(mean, diag_cov, n: int, seed) -> SampleSet:
    """n independent draws from a diagonal Gaussian, deterministic per seed.

    Uses numpy's PCG64 generator seeded through SeedSequence; callers that
    shard work across threads derive child seeds as [seed, tag] lists so every
    consumer owns an independent, order-free stream.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    diag_cov = np.atleast_1d(np.asarray(diag_cov, dtype=float))
    if mean.shape != diag_cov.shape:
        raise ValueError("mean and diag_cov must have the same length")
    if np.any(diag_cov <= 0):
        raise ValueError("variances must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    pts = mean + np.sqrt(diag_cov) * rng.standard_normal((n, mean.size))
    return SampleSet(pts)


def evaluate_solution(model: ConstraintModel, x, eval_sample, alpha: float, seed: int) -> EvalReport:
    """Out-of-sample tail risk, quantile, and violation rate of a decision."""
    eval_sample = as_sample_set(eval_sample)
    vals = evaluate_many(model, x, eval_sample.points)
    return EvalReport(
        cvar_out=empirical_cvar(vals, alpha),
        var_out=empirical_var(vals, alpha),
        violation_prob=float(np.mean(vals > 0.0)),
        n_eval=eval_sample.n,
        seed=int(seed),
    )
