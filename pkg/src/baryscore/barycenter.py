"""Free-support Wasserstein barycenter of N discrete measures.

The barycenter carries fixed uniform masses 1/k on k free locations; the
classic alternating scheme is used: exact transport solves against every
input measure, then the closed-form location update (each location moves to
the aggregation-weighted mean of its barycentric projections). Both halves
decrease the squared-distance objective, so the recorded objective trace is
non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InfeasibleMarginals, SizeMismatch
from .measures import DiscreteMeasure
from .ot import cost_matrix, solve_transport

INIT_STRATEGIES = ("auto", "first_input", "mean_of_inputs", "given")


@dataclass
class BarycenterConfig:
    """Settings for a free-support barycenter solve.

    support_size: number k of barycenter locations (fixed masses 1/k).
    weights: aggregation weights over the input measures. None (default)
        means unit weight 1 per measure, the plain-sum objective; explicit
        weights must sum to 1.
    init_strategy: 'first_input' copies the first measure's support (k must
        match), 'mean_of_inputs' averages supports index-wise (all sizes must
        equal k), 'given' uses initial_support, 'auto' picks mean_of_inputs
        when every input has exactly k points and first_input otherwise.
    """

    support_size: int
    weights: np.ndarray | None = None
    max_outer_iter: int = 50
    objective_tol: float = 1e-6
    init_strategy: str = "auto"
    initial_support: np.ndarray | None = None

    def __post_init__(self):
        if self.support_size < 1:
            raise SizeMismatch(f"support_size must be >= 1, got {self.support_size}")
        if not self.objective_tol > 0:
            raise ValueError("objective_tol must be positive")
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be >= 1")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"unknown init_strategy {self.init_strategy!r}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if abs(float(w.sum()) - 1.0) > 1e-9 or np.any(w < 0):
                raise InfeasibleMarginals(
                    "explicit aggregation weights must be nonnegative and sum to 1"
                )
            self.weights = w


@dataclass
class BarycenterResult:
    measure: DiscreteMeasure
    objective_trace: list[float]
    iterations_used: int
    converged: bool
    # plain-sum-of-distances value at the final support, diagnostic only
    unsquared_objective: float = field(default=0.0)


def _check_common_dim(measures) -> int:
    if len(measures) == 0:
        raise SizeMismatch("at least one input measure is required")
    dim = measures[0].dim
    for idx, measure in enumerate(measures):
        if measure.dim != dim:
            raise DimensionMismatch(
                f"measure {idx} has dimension {measure.dim}, expected {dim}"
            )
    return dim


def init_support(measures, config: BarycenterConfig) -> np.ndarray:
    """Initial (k, d) barycenter locations per the configured strategy."""
    _check_common_dim(measures)
    k = config.support_size
    strategy = config.init_strategy
    if strategy == "auto":
        strategy = (
            "mean_of_inputs"
            if all(m.size == k for m in measures)
            else "first_input"
        )
    if strategy == "given":
        if config.initial_support is None:
            raise SizeMismatch("init_strategy 'given' requires initial_support")
        support = np.asarray(config.initial_support, dtype=np.float64)
        if support.shape != (k, measures[0].dim):
            raise SizeMismatch(
                f"initial_support has shape {support.shape}, "
                f"expected ({k}, {measures[0].dim})"
            )
        return support.copy()
    if strategy == "first_input":
        if measures[0].size != k:
            raise SizeMismatch(
                f"first_input needs k == {measures[0].size}, got k={k}"
            )
        return measures[0].support.copy()
    # mean_of_inputs
    for idx, measure in enumerate(measures):
        if measure.size != k:
            raise SizeMismatch(
                f"mean_of_inputs needs every support size == k={k}; "
                f"measure {idx} has {measure.size}"
            )
    return np.mean([m.support for m in measures], axis=0)


def update_locations(measures, plans, weights, current_support) -> np.ndarray:
    """Move each barycenter location to the weighted mean of its projections.

    plans[l] couples the uniform-1/k barycenter (rows) to measure l
    (columns); the barycentric projection of row i is k * sum_j pi_ij y_j.
    Rows carrying no mass in a plan keep the current location for that
    measure's contribution.
    """
    current = np.asarray(current_support, dtype=np.float64)
    k = current.shape[0]
    weights = np.asarray(weights, dtype=np.float64)
    if len(plans) != len(measures) or len(weights) != len(measures):
        raise SizeMismatch("measures, plans, and weights must align")
    new_support = np.zeros_like(current)
    for measure, plan, lam in zip(measures, plans, weights):
        coupling = plan.coupling if hasattr(plan, "coupling") else np.asarray(plan)
        if coupling.shape != (k, measure.size):
            raise SizeMismatch(
                f"plan shape {coupling.shape} does not couple k={k} "
                f"to {measure.size} points"
            )
        projection = k * (coupling @ measure.support)
        empty = coupling.sum(axis=1) <= 0.0
        if empty.any():
            projection[empty] = current[empty]
        new_support += lam * projection
    return new_support


def free_support_barycenter(measures, config: BarycenterConfig) -> BarycenterResult:
    """Alternating minimization for the fixed-weight free-support barycenter.

    Stops when the objective sum_l lambda_l W2(mu_l, bary)^2 changes by at
    most objective_tol * max(1, previous) between outer iterations, or when
    max_outer_iter is reached (converged=False, no error).
    """
    _check_common_dim(measures)
    n_measures = len(measures)
    k = config.support_size
    if config.weights is None:
        lambdas = np.ones(n_measures)
    else:
        if config.weights.shape[0] != n_measures:
            raise SizeMismatch(
                f"{config.weights.shape[0]} weights for {n_measures} measures"
            )
        lambdas = config.weights
    # the location update needs a convex combination; scaling lambdas does
    # not change the minimizer, only the reported objective
    lambdas_norm = lambdas / lambdas.sum()

    support = init_support(measures, config)
    bary_weights = np.full(k, 1.0 / k)

    trace: list[float] = []
    costs = []
    converged = False
    previous = None
    for outer in range(config.max_outer_iter):
        bary = DiscreteMeasure(support, bary_weights)
        plans = []
        costs = []
        for measure in measures:
            plan, cost = solve_transport(
                bary_weights, measure.weights, cost_matrix(bary, measure, 2.0)
            )
            plans.append(plan)
            costs.append(cost)
        objective = float(np.dot(lambdas, costs))
        trace.append(objective)
        if previous is not None and abs(objective - previous) <= (
            config.objective_tol * max(1.0, previous)
        ):
            converged = True
            break
        if outer == config.max_outer_iter - 1:
            # iteration budget reached: keep the support matching trace[-1]
            break
        support = update_locations(measures, plans, lambdas_norm, support)
        previous = objective

    unsquared = float(np.dot(lambdas, np.sqrt(np.maximum(costs, 0.0))))
    return BarycenterResult(
        measure=DiscreteMeasure(support, bary_weights),
        objective_trace=trace,
        iterations_used=len(trace),
        converged=converged,
        unsquared_objective=unsquared,
    )
