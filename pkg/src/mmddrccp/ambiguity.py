"""MMD estimation and data-driven ambiguity-set radii (concentration bound, bootstrap)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import GAUSSIAN, KernelSpec, gram_entries
from .samples import as_sample_set

RATE_BOUND = "rate_bound"
BOOTSTRAP = "bootstrap"
FIXED = "fixed"

SCALE_MMD_SQUARED = "mmd_squared"
SCALE_MMD = "mmd"

# Gram blocks larger than this many entries are accumulated chunk-wise so
# large evaluation samples never materialize an n^2 matrix.
_CHUNK = 2048


@dataclass(frozen=True)
class AmbiguityRadius:
    """A nonnegative radius for an MMD ambiguity ball, with provenance.

    ``scale`` records whether ``value`` is a squared-MMD statistic (the raw
    bootstrap quantile) or an MMD norm (the concentration bound); the value
    is consumed as-is by the program builders.
    """

    value: float
    method: str = FIXED
    confidence: float | None = None
    scale: str = SCALE_MMD_SQUARED

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("radius must be nonnegative")
        if self.method not in (RATE_BOUND, BOOTSTRAP, FIXED):
            raise ValueError(f"unknown radius method {self.method!r}")
        if self.method in (RATE_BOUND, BOOTSTRAP):
            if self.confidence is None or not (0.0 < self.confidence < 1.0):
                raise ValueError("confidence must lie in (0, 1) for rate/bootstrap radii")
        if self.scale not in (SCALE_MMD_SQUARED, SCALE_MMD):
            raise ValueError(f"unknown radius scale {self.scale!r}")


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampling parameters for the bootstrap radius."""

    replicates: int = 1000
    confidence: float = 0.95
    rng_seed: int = 0

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie in (0, 1)")


def _mean_gram(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    """Mean kernel value over all pairs, accumulated in chunks."""
    na, nb = a.shape[0], b.shape[0]
    if na * nb <= _CHUNK * _CHUNK:
        return float(gram_entries(spec, a, b).mean())
    if spec.family != GAUSSIAN:
        total = 0.0
        for start in range(0, na, _CHUNK):
            total += float(gram_entries(spec, a[start : start + _CHUNK], b).sum())
        return total / (na * nb)
    # blockwise ||a||^2 + ||b||^2 - 2 a.b with in-place exp; avoids an n^2 buffer
    scale = -1.0 / (2.0 * spec.bandwidth**2)
    b_sq = np.einsum("ij,ij->i", b, b)
    total = 0.0
    for start in range(0, na, _CHUNK):
        chunk = a[start : start + _CHUNK]
        block = chunk @ b.T
        block *= -2.0
        block += np.einsum("ij,ij->i", chunk, chunk)[:, None]
        block += b_sq[None, :]
        block *= scale
        np.exp(block, out=block)
        total += float(block.sum())
    return total / (na * nb)


def mmd_sq_biased(X, Y, spec: KernelSpec) -> float:
    """Biased (V-statistic) squared-MMD estimate between two sample sets.

    Returns mean k(x, x') + mean k(y, y') - 2 mean k(x, y), clamped at zero
    from below; the statistic is analytically nonnegative, so any negative
    value is a rounding artifact.
    """
    X = as_sample_set(X)
    Y = as_sample_set(Y)
    if X.dim != Y.dim:
        raise ValueError(f"sample dimension mismatch: {X.dim} vs {Y.dim}")
    a, b = X.points, Y.points
    # the statistic is symmetric; canonicalize the argument order so the
    # floating-point result is bitwise identical under argument swap
    if a.tobytes() > b.tobytes():
        a, b = b, a
    kxx = _mean_gram(spec, a, a)
    kyy = _mean_gram(spec, b, b)
    kxy = _mean_gram(spec, a, b)
    return max(kxx + kyy - 2.0 * kxy, 0.0)


def rate_radius(n: int, delta: float, sup_bound: float = 1.0) -> float:
    """Concentration-bound radius sqrt(C/N) + sqrt(2 C log(1/delta) / N)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    if not sup_bound > 0:
        raise ValueError("sup_bound must be positive")
    return math.sqrt(sup_bound / n) + math.sqrt(2.0 * sup_bound * math.log(1.0 / delta) / n)


def quantile_index(count: int, level: float) -> int:
    """1-based ceil(count * level) with a guard against float rounding."""
    idx = math.ceil(count * level - 1e-9)
    return min(max(idx, 1), count)


def bootstrap_statistics(sample, spec: KernelSpec, cfg: BootstrapConfig) -> np.ndarray:
    """Squared-MMD statistics between the sample and B bootstrap resamples.

    Each replicate draws its indices from an independent substream derived
    from ``cfg.rng_seed`` and the replicate number, so the result does not
    depend on evaluation order.
    """
    sample = as_sample_set(sample)
    n = sample.n
    if n < 2:
        raise ValueError("bootstrap radius needs at least two samples")
    K = gram_entries(spec, sample.points, sample.points)
    k_x = float(K.sum())
    row_sums = K.sum(axis=1)
    stats = np.empty(cfg.replicates)
    for m in range(cfg.replicates):
        rng = np.random.default_rng([cfg.rng_seed, m])
        idx = rng.integers(0, n, size=n)
        counts = np.bincount(idx, minlength=n).astype(float)
        k_y = float(counts @ (K @ counts))
        k_xy = float(counts @ row_sums)
        stats[m] = (k_x + k_y - 2.0 * k_xy) / (n * n)
    return stats


def bootstrap_radius(
    sample, spec: KernelSpec, cfg: BootstrapConfig, scale: str = SCALE_MMD_SQUARED
) -> AmbiguityRadius:
    """Bootstrap ambiguity radius: the confidence-level quantile of the
    resampled squared-MMD statistics (no interpolation).

    ``scale="mmd"`` takes a square root of the quantile; the default keeps
    the raw squared statistic.
    """
    stats = np.sort(bootstrap_statistics(sample, spec, cfg))
    value = float(stats[quantile_index(cfg.replicates, cfg.confidence) - 1])
    value = max(value, 0.0)
    if scale == SCALE_MMD:
        value = math.sqrt(value)
    return AmbiguityRadius(value, method=BOOTSTRAP, confidence=cfg.confidence, scale=scale)
