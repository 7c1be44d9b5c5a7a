"""Kernel evaluations, Gram matrices, bandwidth selection, and PSD factorization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .samples import as_sample_set

GAUSSIAN = "gaussian"
LINEAR_PLUS_ONE = "linear_plus_one"
_FAMILIES = (GAUSSIAN, LINEAR_PLUS_ONE)


class DegenerateSampleError(ValueError):
    """Raised when a bandwidth heuristic would return zero."""


class FactorizationError(RuntimeError):
    """Raised when a Gram matrix cannot be factorized even with maximum jitter."""


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus parameters.

    ``gaussian``: k(x, y) = exp(-||x - y||^2 / (2 sigma^2)) with sigma = bandwidth.
    ``linear_plus_one``: k(x, y) = <x, y> + 1; bandwidth is ignored.

    ``sup_bound`` is a constant C with sup_x k(x, x) <= C over the intended
    support; for the Gaussian kernel it is always 1.
    """

    family: str
    bandwidth: float | None = None
    sup_bound: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}")
        if self.family == GAUSSIAN:
            if self.bandwidth is None or not self.bandwidth > 0:
                raise ValueError("gaussian kernel requires bandwidth > 0")
            if self.sup_bound != 1.0:
                raise ValueError("gaussian kernel has sup_bound fixed at 1")
        if not self.sup_bound > 0:
            raise ValueError("sup_bound must be positive")

    @staticmethod
    def gaussian(bandwidth: float) -> "KernelSpec":
        return KernelSpec(GAUSSIAN, bandwidth=bandwidth, sup_bound=1.0)

    @staticmethod
    def linear_plus_one(sup_bound: float) -> "KernelSpec":
        return KernelSpec(LINEAR_PLUS_ONE, bandwidth=None, sup_bound=sup_bound)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Kernel evaluations between two sample sets; entries[i, j] = k(row_i, col_j)."""

    entries: np.ndarray
    row_label: str | None = None
    col_label: str | None = None

    @property
    def shape(self):
        return self.entries.shape

    @property
    def is_square(self) -> bool:
        return self.entries.shape[0] == self.entries.shape[1]


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"kernel arguments must be equal-length vectors, got {x.shape} and {y.shape}")
    if spec.family == GAUSSIAN:
        d2 = float(np.sum((x - y) ** 2))
        return float(np.exp(-d2 / (2.0 * spec.bandwidth**2)))
    return float(np.dot(x, y) + 1.0)


def gram(spec: KernelSpec, rows, cols) -> GramMatrix:
    """Dense Gram matrix between two sample sets."""
    rows = as_sample_set(rows)
    cols = as_sample_set(cols)
    if rows.dim != cols.dim:
        raise ValueError(f"sample dimension mismatch: {rows.dim} vs {cols.dim}")
    entries = gram_entries(spec, rows.points, cols.points)
    return GramMatrix(entries, row_label=rows.label, col_label=cols.label)


def gram_entries(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gram entries between raw (N, m) and (M, m) point arrays."""
    if spec.family == GAUSSIAN:
        d2 = cdist(a, b, "sqeuclidean")
        return np.exp(-d2 / (2.0 * spec.bandwidth**2))
    return a @ b.T + 1.0


def median_heuristic(sample) -> float:
    """Bandwidth from the median of pairwise Euclidean distances over distinct pairs."""
    sample = as_sample_set(sample)
    if sample.n < 2:
        raise ValueError("median heuristic needs at least two points")
    sigma = float(np.median(pdist(sample.points)))
    if sigma == 0.0:
        raise DegenerateSampleError("median pairwise distance is zero; bandwidth would be degenerate")
    return sigma


def psd_factor(K, jitter: float = 1e-10, max_steps: int = 9) -> tuple[np.ndarray, float]:
    """Lower-triangular L with L L^T = K + lam*I, lam from a jitter ladder.

    The ladder is {0, jitter, 10*jitter, ...} (``max_steps`` rungs after 0);
    the smallest lam that makes the Cholesky factorization succeed is used
    and returned alongside L.
    """
    if isinstance(K, GramMatrix):
        K = K.entries
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("psd_factor expects a square matrix")
    if not np.allclose(K, K.T, atol=1e-12):
        raise ValueError("psd_factor expects a symmetric matrix")
    if jitter < 0:
        raise ValueError("jitter must be nonnegative")

    ladder = [0.0]
    if jitter > 0:
        ladder += [jitter * 10.0**k for k in range(max_steps)]
    eye = np.eye(K.shape[0])
    for lam in ladder:
        try:
            L = np.linalg.cholesky(K + lam * eye)
            return L, lam
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError(
        f"Cholesky failed for a {K.shape[0]}x{K.shape[0]} matrix even with jitter {ladder[-1]:g}"
    )
