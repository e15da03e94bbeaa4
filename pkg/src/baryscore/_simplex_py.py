"""Pure-Python network simplex kernel for the dense transportation problem.

This is the fallback for the compiled kernel in ``_simplex_cy``; both
implement the identical algorithm so they produce bit-identical plans. Keep
the two in lockstep when editing.

Pivoting: most-negative reduced cost (Dantzig) with least-index tie-breaks,
switching to Bland's least-index rule whenever a long run of degenerate
pivots suggests stalling. Bland's rule cannot cycle, so the hybrid always
terminates; both rules are deterministic, so identical inputs yield identical
plans. The leaving arc is the minimum-flow reverse arc on the pivot cycle,
ties broken by least arc index.

The basis is a spanning tree on the bipartite graph of n source and m sink
nodes, stored as parallel arrays of n+m-1 basic arcs. Node potentials are
recomputed from the root each pivot; with sentence-scale instances the
rebuild is as cheap as an incremental update and far simpler.
"""

import numpy as np

STATUS_OPTIMAL = 0
STATUS_PIVOT_BUDGET = 1


def solve_kernel(a, b, C, tol, max_pivots):
    """Solve min <P, C> s.t. P1 = a, P^T 1 = b, P >= 0 with strictly
    positive a, b.

    Returns (plan, pivots_used, status). `tol` is the absolute reduced-cost
    threshold below which an arc is considered improving (caller scales it
    to the cost magnitude).
    """
    n, m = C.shape
    n_nodes = n + m
    n_basic = n_nodes - 1

    # north-west corner initial basis: a staircase path of n+m-1 cells
    bi = np.zeros(n_basic, dtype=np.int64)
    bj = np.zeros(n_basic, dtype=np.int64)
    bf = np.zeros(n_basic, dtype=np.float64)
    a_rem = a.copy()
    b_rem = b.copy()
    i = j = 0
    for t in range(n_basic):
        f = a_rem[i] if a_rem[i] <= b_rem[j] else b_rem[j]
        bi[t] = i
        bj[t] = j
        bf[t] = f
        a_rem[i] -= f
        b_rem[j] -= f
        if a_rem[i] <= 0.0 and i < n - 1:
            i += 1
        elif j < m - 1:
            j += 1
        else:
            i += 1

    potential = np.zeros(n_nodes, dtype=np.float64)
    parent = np.zeros(n_nodes, dtype=np.int64)
    parent_arc = np.zeros(n_nodes, dtype=np.int64)
    depth = np.zeros(n_nodes, dtype=np.int64)
    visited = np.zeros(n_nodes, dtype=bool)

    status = STATUS_PIVOT_BUDGET
    pivots = 0
    degenerate_run = 0
    while True:
        # node potentials from the current tree (u_i + v_j = C_ij on basic arcs)
        adjacency = [[] for _ in range(n_nodes)]
        for t in range(n_basic):
            adjacency[bi[t]].append(t)
            adjacency[n + bj[t]].append(t)
        visited[:] = False
        visited[0] = True
        potential[0] = 0.0
        parent[0] = -1
        parent_arc[0] = -1
        depth[0] = 0
        stack = [0]
        while stack:
            node = stack.pop()
            for t in adjacency[node]:
                src = bi[t]
                other = n + bj[t] if node == src else src
                if not visited[other]:
                    visited[other] = True
                    parent[other] = node
                    parent_arc[other] = t
                    depth[other] = depth[node] + 1
                    potential[other] = C[bi[t], bj[t]] - potential[node]
                    stack.append(other)

        # entering arc
        reduced = (C - potential[:n, None]) - potential[None, n:]
        flat_reduced = reduced.ravel()
        if degenerate_run > n_nodes:
            # anti-cycling mode: first improving arc (Bland)
            improving = flat_reduced < -tol
            if not improving.any():
                status = STATUS_OPTIMAL
                break
            flat = int(np.argmax(improving))
        else:
            # steepest rule: most negative reduced cost, least index on ties
            flat = int(np.argmin(flat_reduced))
            if flat_reduced[flat] >= -tol:
                status = STATUS_OPTIMAL
                break
        if pivots >= max_pivots:
            break
        pivots += 1
        ei, ej = divmod(flat, m)

        # unique cycle: walk both endpoints up to their lowest common ancestor;
        # a tree arc gains flow (sign +1) or loses it (sign -1) depending on
        # which side of the cycle it sits on
        x = ei
        y = n + ej
        theta = -1.0
        leave_slot = -1
        leave_key = 0
        cycle_slots = []
        cycle_signs = []
        while x != y:
            if depth[x] >= depth[y]:
                t = parent_arc[x]
                sign = -1.0 if x < n else 1.0
                x = parent[x]
            else:
                t = parent_arc[y]
                sign = 1.0 if y < n else -1.0
                y = parent[y]
            cycle_slots.append(t)
            cycle_signs.append(sign)
            if sign < 0.0:
                f = bf[t]
                key = bi[t] * m + bj[t]
                if leave_slot < 0 or f < theta or (f == theta and key < leave_key):
                    theta = f
                    leave_slot = t
                    leave_key = key

        degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
        for t, sign in zip(cycle_slots, cycle_signs):
            bf[t] += sign * theta
        bi[leave_slot] = ei
        bj[leave_slot] = ej
        bf[leave_slot] = theta

    plan = np.zeros((n, m), dtype=np.float64)
    plan[bi, bj] = bf
    return plan, pivots, status
