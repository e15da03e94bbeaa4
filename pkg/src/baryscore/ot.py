"""Exact discrete optimal transport between finite weighted point clouds.

The exact path is a network simplex on the bipartite transportation graph
(see `kernels` for the compiled/pure-Python selection); `sinkhorn_transport`
is an optional entropic approximation and is never used by default scoring.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    DomainError,
    NonConvergence,
    NonFinite,
    SolverFailure,
)
from .measures import CostMatrix, DiscreteMeasure, TransportPlan, normalize_weights

# reduced costs accumulate ~(n+m) rounding errors of size eps*|C|; pivoting
# below this threshold would chase noise
_PIVOT_TOL_SCALE = 5e-13
DEFAULT_PIVOT_BUDGET = 100_000

# cap the (rows, m, d) difference temporaries at ~32 MB
_COST_CHUNK_ELEMENTS = 4_000_000


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0) -> CostMatrix:
    """Pairwise ground costs ||x_i - y_j||^p between two measures' supports.

    Computed from explicit coordinate differences (not the expanded dot
    product), so entries track a direct recomputation to ~1e-12 even for
    distant clouds; rows are chunked to bound the temporary tensors.
    """
    if not p > 0:
        raise DomainError(f"exponent p must be positive, got {p}")
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dimension mismatch: {mu.dim} vs {nu.dim}")
    x, y = mu.support, nu.support
    n = x.shape[0]
    chunk_rows = max(1, _COST_CHUNK_ELEMENTS // (y.shape[0] * y.shape[1]))
    entries = np.empty((n, y.shape[0]), dtype=np.float64)
    for start in range(0, n, chunk_rows):
        stop = min(start + chunk_rows, n)
        diff = x[start:stop, None, :] - y[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        if p == 2.0:
            entries[start:stop] = sq
        else:
            entries[start:stop] = sq ** (p / 2.0)
    if not np.all(np.isfinite(entries)):
        raise NonFinite("cost matrix overflowed to non-finite values")
    return CostMatrix(entries, p)


def _cost_entries(C) -> np.ndarray:
    if isinstance(C, CostMatrix):
        return C.entries
    entries = np.asarray(C, dtype=np.float64)
    if entries.ndim != 2:
        raise DimensionMismatch("cost matrix must be 2-D")
    if not np.all(np.isfinite(entries)):
        raise NonFinite("cost matrix contains NaN or Inf")
    return entries


def solve_transport(a, b, C, max_pivots: int = DEFAULT_PIVOT_BUDGET):
    """Exact optimal transport between weight vectors a and b under cost C.

    Returns (TransportPlan, optimal_cost). The plan is a vertex of the
    transportation polytope reached by a deterministic network simplex
    (steepest entering arc, least-index tie-breaks, Bland's rule on
    degenerate stalls), so repeated calls on identical inputs return
    identical plans. Zero-weight entries are dropped before the solve and
    restored as zero rows/columns.
    """
    entries = _cost_entries(C)
    a = normalize_weights(a, "source marginal")
    b = normalize_weights(b, "target marginal")
    n, m = entries.shape
    if a.shape[0] != n or b.shape[0] != m:
        raise DimensionMismatch(
            f"cost is {n}x{m} but marginals have sizes {a.shape[0]}, {b.shape[0]}"
        )

    rows = np.flatnonzero(a > 0.0)
    cols = np.flatnonzero(b > 0.0)
    sub_a = np.ascontiguousarray(a[rows])
    sub_b = np.ascontiguousarray(b[cols])
    sub_c = np.ascontiguousarray(entries[np.ix_(rows, cols)])

    tol = _PIVOT_TOL_SCALE * float(sub_c.max(initial=0.0))
    sub_plan, pivots, status = kernels.solve_kernel(
        sub_a, sub_b, sub_c, tol, max_pivots
    )
    if status == kernels.STATUS_PIVOT_BUDGET:
        raise SolverFailure(
            f"network simplex exceeded the pivot budget ({max_pivots})"
        )

    if rows.size == n and cols.size == m:
        coupling = sub_plan
    else:
        coupling = np.zeros((n, m), dtype=np.float64)
        coupling[np.ix_(rows, cols)] = sub_plan
    plan = TransportPlan(coupling, a, b)
    cost = float(np.sum(plan.coupling * entries))
    return plan, cost


def wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0) -> float:
    """p-Wasserstein distance: (optimal transport cost under ||.||^p)^(1/p)."""
    C = cost_matrix(mu, nu, p)
    _, cost = solve_transport(mu.weights, nu.weights, C)
    return cost ** (1.0 / p)


def _logsumexp_rows(arr: np.ndarray) -> np.ndarray:
    peak = arr.max(axis=1)
    return peak + np.log(np.exp(arr - peak[:, None]).sum(axis=1))


def sinkhorn_transport(a, b, C, epsilon: float, max_iter: int = 5000,
                       tol: float = 1e-8):
    """Entropy-regularized transport via log-domain Sinkhorn iterations.

    Returns (TransportPlan, cost) with the plan flagged approximate. Raises
    NonConvergence when the marginal error still exceeds `tol` after
    `max_iter` sweeps.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if max_iter < 1:
        raise DomainError("max_iter must be at least 1")
    entries = _cost_entries(C)
    a = normalize_weights(a, "source marginal")
    b = normalize_weights(b, "target marginal")
    n, m = entries.shape
    if a.shape[0] != n or b.shape[0] != m:
        raise DimensionMismatch(
            f"cost is {n}x{m} but marginals have sizes {a.shape[0]}, {b.shape[0]}"
        )

    rows = np.flatnonzero(a > 0.0)
    cols = np.flatnonzero(b > 0.0)
    sub_a = a[rows]
    sub_b = b[cols]
    log_kernel = -entries[np.ix_(rows, cols)] / epsilon
    log_a = np.log(sub_a)
    log_b = np.log(sub_b)

    f = np.zeros(rows.size)
    g = np.zeros(cols.size)
    err = np.inf
    for _ in range(max_iter):
        f = log_a - _logsumexp_rows(log_kernel + g[None, :])
        g = log_b - _logsumexp_rows((log_kernel + f[:, None]).T)
        sub_plan = np.exp(f[:, None] + g[None, :] + log_kernel)
        err = max(
            float(np.abs(sub_plan.sum(axis=1) - sub_a).max()),
            float(np.abs(sub_plan.sum(axis=0) - sub_b).max()),
        )
        if err <= tol:
            break
    else:
        raise NonConvergence(
            f"sinkhorn marginal error {err:.3e} > tol {tol:.3e} "
            f"after {max_iter} iterations"
        )

    if rows.size == n and cols.size == m:
        coupling = sub_plan
    else:
        coupling = np.zeros((n, m), dtype=np.float64)
        coupling[np.ix_(rows, cols)] = sub_plan
    plan = TransportPlan(coupling, a, b, approximate=True)
    cost = float(np.sum(plan.coupling * entries))
    return plan, cost
