"""Independent reference implementations used to freeze expected test values.

Everything here is deliberately naive and textbook-style, and stays
independent of the code paths it checks:

* a dense two-phase tableau simplex (written before the production solver)
  for exact transport costs on small instances,
* a quantile-function Wasserstein oracle for 1-D measures,
* brute-force rank/pair-counting correlation oracles,
* a quadrature-based Student-t tail oracle (scipy.integrate, independent of
  the package's continued-fraction incomplete beta),
* a dense grid search for tiny 1-D free-support barycenters.
"""

import math

import numpy as np
from scipy import integrate

_PIVOT_EPS = 1e-11


# ---------------------------------------------------------------------------
# Dense two-phase simplex (Bland's rule), min c.x s.t. Ax = b, x >= 0.
# ---------------------------------------------------------------------------

def _bland_pivot_column(tableau, n_vars, allowed):
    row = tableau[-1, :n_vars]
    for j in range(n_vars):
        if allowed[j] and row[j] < -_PIVOT_EPS:
            return j
    return -1


def _bland_pivot_row(tableau, col, basis):
    n_rows = tableau.shape[0] - 1
    best = -1
    best_ratio = None
    for i in range(n_rows):
        coef = tableau[i, col]
        if coef > _PIVOT_EPS:
            ratio = tableau[i, -1] / coef
            if (
                best == -1
                or ratio < best_ratio - _PIVOT_EPS
                or (abs(ratio - best_ratio) <= _PIVOT_EPS and basis[i] < basis[best])
            ):
                best = i
                best_ratio = ratio
    return best


def _pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    for i in range(tableau.shape[0]):
        if i != row and tableau[i, col] != 0.0:
            tableau[i] -= tableau[i, col] * tableau[row]
    basis[row] = col


def _run_simplex(tableau, basis, n_vars, allowed):
    while True:
        col = _bland_pivot_column(tableau, n_vars, allowed)
        if col == -1:
            return
        row = _bland_pivot_row(tableau, col, basis)
        if row == -1:
            raise RuntimeError("oracle LP is unbounded (cannot happen for transport)")
        _pivot(tableau, basis, row, col)


def lp_solve_equality(c, A, b):
    """Solve min c.x s.t. Ax = b, x >= 0 with a two-phase tableau simplex.

    Handles redundant rows (transport constraint matrices have rank
    n + m - 1) by dropping zero rows left from phase 1. Returns (x, value).
    """
    A = np.asarray(A, dtype=np.float64).copy()
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    n_rows, n_vars = A.shape
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificials form the starting basis
    n_total = n_vars + n_rows
    tableau = np.zeros((n_rows + 1, n_total + 1))
    tableau[:n_rows, :n_vars] = A
    tableau[:n_rows, n_vars:n_total] = np.eye(n_rows)
    tableau[:n_rows, -1] = b
    basis = list(range(n_vars, n_total))
    # phase-1 objective: sum of artificials, expressed in reduced form
    tableau[-1, :n_vars] = -A.sum(axis=0)
    tableau[-1, -1] = -b.sum()
    allowed = np.ones(n_total, dtype=bool)
    _run_simplex(tableau, basis, n_total, allowed)
    if tableau[-1, -1] < -1e-7:
        raise RuntimeError("oracle LP infeasible")

    # drive remaining artificials out of the basis or drop their rows
    keep_rows = []
    for i in range(n_rows):
        if basis[i] >= n_vars:
            pivot_col = -1
            for j in range(n_vars):
                if abs(tableau[i, j]) > _PIVOT_EPS:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(tableau, basis, i, pivot_col)
                keep_rows.append(i)
            # else: redundant row, drop it
        else:
            keep_rows.append(i)
    rows = keep_rows + [n_rows]
    tableau = tableau[rows][:, list(range(n_vars)) + [n_total]]
    basis = [basis[i] for i in keep_rows]

    # phase 2: restore the real objective in reduced form
    tableau[-1, :] = 0.0
    tableau[-1, :n_vars] = c
    for i, var in enumerate(basis):
        if tableau[-1, var] != 0.0:
            tableau[-1] -= tableau[-1, var] * tableau[i]
    allowed = np.ones(n_vars, dtype=bool)
    _run_simplex(tableau, basis, n_vars, allowed)

    x = np.zeros(n_vars)
    for i, var in enumerate(basis):
        x[var] = tableau[i, -1]
    return x, float(c @ x)


def transport_cost_lp(a, b, cost):
    """Exact optimal transport cost via the dense simplex oracle."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    rhs = np.concatenate([a, b])
    x, value = lp_solve_equality(cost.ravel(), A, rhs)
    return x.reshape(n, m), value


# ---------------------------------------------------------------------------
# 1-D Wasserstein via quantile functions.
# ---------------------------------------------------------------------------

def wasserstein_1d_cost(x, wx, y, wy, p=2.0):
    """Optimal transport *cost* (not distance) between 1-D discrete measures.

    Walks the merged quantile levels of both distributions; the monotone
    coupling is optimal for any convex power cost.
    """
    ox = np.argsort(x, kind="stable")
    oy = np.argsort(y, kind="stable")
    x, wx = np.asarray(x, float)[ox], np.asarray(wx, float)[ox]
    y, wy = np.asarray(y, float)[oy], np.asarray(wy, float)[oy]
    i = j = 0
    li = lj = 0.0
    total = 0.0
    while i < len(x) and j < len(y):
        step = min(wx[i] - li, wy[j] - lj)
        if step > 0:
            total += step * abs(x[i] - y[j]) ** p
        li += step
        lj += step
        if li >= wx[i] - 1e-15:
            i += 1
            li = 0.0
        if lj >= wy[j] - 1e-15:
            j += 1
            lj = 0.0
    return total


# ---------------------------------------------------------------------------
# Correlation coefficients from their definitions.
# ---------------------------------------------------------------------------

def pearson_oracle(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    dx = x - x.mean()
    dy = y - y.mean()
    return float((dx * dy).sum() / math.sqrt((dx * dx).sum() * (dy * dy).sum()))


def ranks_oracle(values):
    """Fractional (average-tie) ranks computed by direct counting."""
    values = np.asarray(values, float)
    out = np.empty(len(values))
    for i, v in enumerate(values):
        less = int((values < v).sum())
        equal = int((values == v).sum())
        # average of ranks less+1 .. less+equal
        out[i] = less + (equal + 1) / 2.0
    return out


def spearman_oracle(x, y):
    return pearson_oracle(ranks_oracle(x), ranks_oracle(y))


def kendall_tau_b_oracle(x, y):
    """Tau-b by exhaustive enumeration of all C(n,2) pairs."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    return (concordant - discordant) / denom


# ---------------------------------------------------------------------------
# Student-t one-sided tail probability via numerical quadrature.
# ---------------------------------------------------------------------------

def t_density(u, df):
    log_norm = (
        math.lgamma((df + 1) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(log_norm - (df + 1) / 2.0 * math.log1p(u * u / df))


def t_sf_quadrature(t, df):
    """P(T >= t) for Student-t with df degrees of freedom, by quadrature."""
    if t == 0.0:
        return 0.5
    half, err = integrate.quad(
        t_density, 0.0, abs(t), args=(df,), epsabs=1e-13, epsrel=1e-13,
        limit=200,
    )
    assert err < 1e-8
    return 0.5 - half if t > 0 else 0.5 + half


def williams_t_oracle(r12, r13, r23, n):
    """The dependent-correlation t statistic, recomputed from scratch."""
    det = 1.0 - r12**2 - r13**2 - r23**2 + 2.0 * r12 * r13 * r23
    mean_r = 0.5 * (r12 + r13)
    denom = math.sqrt(
        2.0 * det * (n - 1) / (n - 3) + mean_r**2 * (1.0 - r23) ** 3
    )
    return (r12 - r13) * math.sqrt((n - 1) * (1.0 + r23)) / denom


# ---------------------------------------------------------------------------
# Grid search for 1-D two-point free-support barycenters (k = 2).
# ---------------------------------------------------------------------------

def _w2sq_two_point_vs_uniform_pair(u1, u2, w1, x1, x2):
    """W2^2 between (w1, 1-w1) on sorted (u1, u2) and (1/2, 1/2) on (x1, x2).

    x1, x2 may be ndarrays (grid evaluation); requires x1 <= x2 elementwise.
    Derived from the monotone quantile coupling.
    """
    if w1 <= 0.5:
        return (
            w1 * (u1 - x1) ** 2
            + (0.5 - w1) * (u2 - x1) ** 2
            + 0.5 * (u2 - x2) ** 2
        )
    return (
        0.5 * (u1 - x1) ** 2
        + (w1 - 0.5) * (u1 - x2) ** 2
        + (1.0 - w1) * (u2 - x2) ** 2
    )


def grid_barycenter_objective(measures, step=1e-3, margin=0.25):
    """Minimum of sum_l W2^2(mu_l, nu) over nu = (1/2, 1/2) on a dense grid.

    measures: list of (support[2] sorted, weights[2]) 1-D inputs with unit
    aggregation weights. Exhaustive over the (x1 <= x2) grid; exact to O(step^2)
    near the quadratic minimum.
    """
    lo = min(float(m[0][0]) for m in measures) - margin
    hi = max(float(m[0][1]) for m in measures) + margin
    grid = np.arange(lo, hi + step, step)
    best = math.inf
    # evaluate objective(x1, grid[x2 >= x1]) one x1-row at a time
    for x1 in grid:
        x2 = grid[grid >= x1]
        total = np.zeros_like(x2)
        for (u, w) in measures:
            total += _w2sq_two_point_vs_uniform_pair(u[0], u[1], w[0], x1, x2)
        row_best = float(total.min())
        if row_best < best:
            best = row_best
    return best
