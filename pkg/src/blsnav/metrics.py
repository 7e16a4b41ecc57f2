"""Traversal metrics and the Frechet distance between Gaussian feature fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError
from .linalg import CLAMP_FLOOR, trace_sqrt_product


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"shape mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InputError("cosine similarity of a zero-length vector is undefined")
    return float(min(1.0, max(-1.0, (a @ b) / (na * nb))))


@dataclass(frozen=True, eq=False)
class FeaturePopulation:
    features: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    degenerate: bool

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def count(self) -> int:
        return self.features.shape[0]


def fit_gaussian(features) -> FeaturePopulation:
    """Sample mean and unbiased covariance of a feature population.

    The fit is flagged ``degenerate`` when it cannot be full rank, either
    because there are fewer than ``m + 1`` samples or because the samples are
    confined to a proper subspace.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise InputError(f"features must be a 2-d array of samples, got shape {x.shape}")
    count, m = x.shape
    if count < 2:
        raise InputError(f"need at least 2 samples, got {count}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (count - 1)
    cov = 0.5 * (cov + cov.T)
    degenerate = count < m + 1 or np.linalg.matrix_rank(cov) < m
    return FeaturePopulation(features=x, mean=mean, cov=cov, degenerate=bool(degenerate))


def frechet_from_moments(mu1, c1, mu2, c2) -> float:
    """Squared Frechet distance between N(mu1, c1) and N(mu2, c2)."""
    mu1 = np.asarray(mu1, dtype=np.float64)
    mu2 = np.asarray(mu2, dtype=np.float64)
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    if mu1.shape != mu2.shape or c1.shape != c2.shape or c1.shape != (mu1.size, mu1.size):
        raise InputError(
            f"dimension mismatch: means {mu1.shape}/{mu2.shape}, covariances {c1.shape}/{c2.shape}"
        )
    diff = mu1 - mu2
    mean_term = float(diff @ diff)
    cov_term = float(np.trace(c1) + np.trace(c2)) - 2.0 * trace_sqrt_product(c1, c2)
    d2 = mean_term + cov_term
    if d2 < 0.0:
        if d2 < -CLAMP_FLOOR * max(1.0, float(np.trace(c1) + np.trace(c2))):
            raise NumericError(f"Frechet distance came out negative ({d2:.3e})")
        d2 = 0.0
    return d2


def frechet_distance(p: FeaturePopulation, q: FeaturePopulation) -> float:
    return frechet_from_moments(p.mean, p.cov, q.mean, q.cov)
