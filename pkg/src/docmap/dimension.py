"""Dimensionality calculations feeding the mapping stage.

Two independent quantities: a worst-case embedding-dimension lower bound
for distance-preserving maps of m points at distortion epsilon, and the
intrinsic dimensionality of a concrete vector set from its PCA spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Covariance spectra computed densely up to this many ambient dimensions;
# above it the Gram matrix or iterative top-k decomposition is used.
_DENSE_LIMIT = 4096

# Eigenvalues below this fraction of the largest are round-off, not rank.
_EIG_FLOOR = 1e-12


@dataclass
class JlQuery:
    """Point count m and distortion fraction epsilon, 0 < epsilon < 1."""

    m: int
    epsilon: float


@dataclass
class DimensionEstimate:
    """PCA intrinsic-dimension result.

    ``explained_variance`` is the cumulative variance-fraction curve, one
    entry per retained component count; ``intrinsic_dim`` is the smallest
    count whose cumulative fraction reaches ``threshold``.
    """

    intrinsic_dim: int
    explained_variance: list[float]
    threshold: float


def jl_min_dimension(q: JlQuery) -> int:
    """Smallest integer n with n > 8*ln(m)/epsilon^2.

    This is the worst-case target dimension that guarantees a pairwise
    distance-preserving linear embedding of m points within distortion
    factor 1 +- epsilon exists. For m = 1 the bound is 0 and the result
    is 1.
    """
    if q.m < 1:
        raise ValueError(f"m must be >= 1, got {q.m}")
    if not (0.0 < q.epsilon < 1.0):
        raise ValueError(f"epsilon must be in (0, 1), got {q.epsilon}")
    bound = 8.0 * math.log(q.m) / (q.epsilon * q.epsilon)
    return int(math.floor(bound)) + 1


def _descending_eigenvalues(vectors: np.ndarray) -> np.ndarray:
    """Sample-covariance eigenvalues, descending, negatives clipped.

    Uses the dense covariance when the ambient dimension allows, the Gram
    matrix when only the sample count does (identical nonzero spectrum),
    and an iterative top-k sweep otherwise.
    """
    n, d = vectors.shape
    centered = vectors - vectors.mean(axis=0)
    if d <= _DENSE_LIMIT:
        cov = (centered.T @ centered) / (n - 1)
        eigs = np.linalg.eigvalsh(cov)[::-1]
    elif n <= _DENSE_LIMIT:
        gram = (centered @ centered.T) / (n - 1)
        eigs = np.linalg.eigvalsh(gram)[::-1]
    else:
        return _iterative_eigenvalues(centered)
    return np.clip(eigs, 0.0, None)


def _iterative_eigenvalues(centered: np.ndarray) -> np.ndarray:
    """Top-k singular-value sweep, k doubled until the spectrum tail is
    negligible against the exact total variance. Returned spectrum may be
    truncated; callers treat the uncomputed tail as zero."""
    from scipy.sparse.linalg import svds

    n, d = centered.shape
    total = float((centered**2).sum()) / (n - 1)
    k_max = min(n, d) - 1
    k = min(64, k_max)
    while True:
        s = svds(centered, k=k, return_singular_vectors=False)
        eigs = np.clip(np.sort(s)[::-1] ** 2 / (n - 1), 0.0, None)
        if k == k_max or eigs.sum() >= (1.0 - _EIG_FLOOR) * total:
            return eigs
        k = min(k * 2, k_max)


def intrinsic_dimension_pca(vectors, threshold: float) -> DimensionEstimate:
    """Number of principal components needed to reach ``threshold`` of the
    total variance.

    Degenerate input (all points identical) yields intrinsic_dim 0 with an
    empty curve. Raises ValueError on fewer than 2 vectors, ragged input,
    or a threshold outside (0, 1].
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("vectors must all have the same length")
    if arr.shape[0] < 2:
        raise ValueError(f"need at least 2 vectors, got {arr.shape[0]}")

    eigs = _descending_eigenvalues(arr)
    if eigs.size == 0 or eigs[0] <= 0.0:
        return DimensionEstimate(intrinsic_dim=0, explained_variance=[], threshold=threshold)

    eigs[eigs < _EIG_FLOOR * eigs[0]] = 0.0
    total = eigs.sum()
    # Retained variance is 1 by definition once every component is kept;
    # pin the curve end so threshold = 1.0 is always reachable.
    curve = np.minimum(np.cumsum(eigs) / total, 1.0)
    curve[-1] = 1.0
    intrinsic = int(np.searchsorted(curve, threshold, side="left") + 1)
    return DimensionEstimate(
        intrinsic_dim=intrinsic,
        explained_variance=[float(x) for x in curve],
        threshold=threshold,
    )
