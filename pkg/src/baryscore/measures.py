"""Weighted point clouds, cost matrices, and transport plans.

All numeric payloads are float64 ndarrays; single precision cannot reach the
oracle tolerances used by the test suite at embedding dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainError, InfeasibleMarginals, NonFinite

# |sum(w) - 1| below this is silently renormalized; above it is an error.
WEIGHT_SUM_TOLERANCE = 1e-6


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return arr


def normalize_weights(weights, name: str = "weights") -> np.ndarray:
    """Validate a probability vector, renormalizing away float drift.

    Deviations of |sum - 1| up to 1e-6 are absorbed silently; anything larger
    is a caller bug and raises InfeasibleMarginals, as do negative entries.
    """
    w = _as_float_array(weights, name)
    if w.ndim != 1 or w.size == 0:
        raise InfeasibleMarginals(f"{name} must be a non-empty 1-D vector")
    if np.any(w < 0.0):
        raise InfeasibleMarginals(f"{name} has negative entries")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InfeasibleMarginals(f"{name} sums to {total!r}, not 1")
    return w / total


@dataclass
class DiscreteMeasure:
    """A probability measure with finite support in R^d.

    support has shape (n, d); weights has shape (n,), is nonnegative, and sums
    to 1 (renormalized on construction within the 1e-6 drift tolerance).
    """

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = _as_float_array(self.support, "support")
        if support.ndim == 1:
            support = support[:, None]
        if support.ndim != 2 or support.shape[0] == 0:
            raise DimensionMismatch("support must be a non-empty (n, d) array")
        weights = normalize_weights(self.weights, "weights")
        if weights.shape[0] != support.shape[0]:
            raise DimensionMismatch(
                f"{weights.shape[0]} weights for {support.shape[0]} support points"
            )
        self.support = support
        self.weights = weights

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    @classmethod
    def uniform(cls, support) -> "DiscreteMeasure":
        support = np.asarray(support, dtype=np.float64)
        n = support.shape[0]
        return cls(support, np.full(n, 1.0 / n))


@dataclass
class CostMatrix:
    """Pairwise ground costs ||x_i - y_j||^p between two supports."""

    entries: np.ndarray
    p: float

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise DimensionMismatch("cost entries must be 2-D")
        if not np.all(np.isfinite(entries)):
            raise NonFinite("cost matrix contains NaN or Inf")
        if np.any(entries < 0.0):
            raise NonFinite("cost matrix contains negative entries")
        if not self.p > 0:
            raise DomainError(f"exponent p must be positive, got {self.p}")
        self.entries = entries
        self.p = float(self.p)

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class TransportPlan:
    """A coupling realizing a transport between two weight vectors.

    Row sums reproduce source_marginal and column sums reproduce
    target_marginal within 1e-8; entries are clamped to be nonnegative.
    `approximate` is False for exact (simplex) solutions and True for
    entropic ones.
    """

    coupling: np.ndarray
    source_marginal: np.ndarray
    target_marginal: np.ndarray
    approximate: bool = field(default=False)

    def __post_init__(self):
        coupling = np.asarray(self.coupling, dtype=np.float64)
        if np.any(coupling < -1e-12):
            raise InfeasibleMarginals("coupling has entries below -1e-12")
        self.coupling = np.maximum(coupling, 0.0)
        self.source_marginal = np.asarray(self.source_marginal, dtype=np.float64)
        self.target_marginal = np.asarray(self.target_marginal, dtype=np.float64)

    def marginal_error(self) -> float:
        """Largest absolute deviation of the plan marginals from the inputs."""
        row = np.abs(self.coupling.sum(axis=1) - self.source_marginal).max()
        col = np.abs(self.coupling.sum(axis=0) - self.target_marginal).max()
        return float(max(row, col))
