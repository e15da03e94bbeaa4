# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled network simplex kernel.

Mirror of ``_simplex_py.solve_kernel`` with identical pivot rules and
floating-point operation order, so both kernels return bit-identical plans.
Keep the two in lockstep when editing.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

STATUS_OPTIMAL = 0
STATUS_PIVOT_BUDGET = 1


def solve_kernel(cnp.ndarray[cnp.float64_t, ndim=1] a,
                 cnp.ndarray[cnp.float64_t, ndim=1] b,
                 cnp.ndarray[cnp.float64_t, ndim=2] C,
                 double tol,
                 long max_pivots):
    cdef long n = C.shape[0]
    cdef long m = C.shape[1]
    cdef long n_nodes = n + m
    cdef long n_basic = n_nodes - 1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] bi = np.zeros(n_basic, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bj = np.zeros(n_basic, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bf = np.zeros(n_basic, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_rem = a.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b_rem = b.copy()

    cdef long i = 0
    cdef long j = 0
    cdef long t
    cdef double f
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

    cdef cnp.ndarray[cnp.float64_t, ndim=1] potential = np.zeros(n_nodes)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent = np.zeros(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent_arc = np.zeros(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] depth = np.zeros(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] visited = np.zeros(n_nodes, dtype=np.uint8)
    # CSR adjacency over nodes: each basic arc appears at both endpoints
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_start = np.zeros(n_nodes + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_fill = np.zeros(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj_arc = np.zeros(2 * n_basic, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.zeros(n_nodes, dtype=np.int64)
    # cycle scratch: the cycle can touch every tree arc once
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cyc_slot = np.zeros(n_basic, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cyc_sign = np.zeros(n_basic, dtype=np.float64)

    cdef long status = STATUS_PIVOT_BUDGET
    cdef long pivots = 0
    cdef long degenerate_run = 0
    cdef long node, other, src, stack_top, pos, k
    cdef long ei, ej, x, y, n_cycle, leave_slot, flat
    cdef long key, leave_key
    cdef double red, best, theta, sign
    cdef bint found

    while True:
        # adjacency (counting sort keeps arcs in slot order per node)
        for node in range(n_nodes + 1):
            adj_start[node] = 0
        for t in range(n_basic):
            adj_start[bi[t] + 1] += 1
            adj_start[n + bj[t] + 1] += 1
        for node in range(n_nodes):
            adj_start[node + 1] += adj_start[node]
            adj_fill[node] = adj_start[node]
        for t in range(n_basic):
            adj_arc[adj_fill[bi[t]]] = t
            adj_fill[bi[t]] += 1
            adj_arc[adj_fill[n + bj[t]]] = t
            adj_fill[n + bj[t]] += 1

        # potentials via DFS from node 0
        for node in range(n_nodes):
            visited[node] = 0
        visited[0] = 1
        potential[0] = 0.0
        parent[0] = -1
        parent_arc[0] = -1
        depth[0] = 0
        stack[0] = 0
        stack_top = 1
        while stack_top > 0:
            stack_top -= 1
            node = stack[stack_top]
            for pos in range(adj_start[node], adj_start[node + 1]):
                t = adj_arc[pos]
                src = bi[t]
                other = n + bj[t] if node == src else src
                if not visited[other]:
                    visited[other] = 1
                    parent[other] = node
                    parent_arc[other] = t
                    depth[other] = depth[node] + 1
                    potential[other] = C[bi[t], bj[t]] - potential[node]
                    stack[stack_top] = other
                    stack_top += 1

        # entering arc
        found = False
        flat = 0
        if degenerate_run > n_nodes:
            # anti-cycling mode: first improving arc (Bland)
            for i in range(n):
                for j in range(m):
                    red = (C[i, j] - potential[i]) - potential[n + j]
                    if red < -tol:
                        flat = i * m + j
                        found = True
                        break
                if found:
                    break
        else:
            # steepest rule: most negative reduced cost, least index on ties
            best = -tol
            for i in range(n):
                for j in range(m):
                    red = (C[i, j] - potential[i]) - potential[n + j]
                    if red < best:
                        best = red
                        flat = i * m + j
                        found = True
        if not found:
            status = STATUS_OPTIMAL
            break
        if pivots >= max_pivots:
            break
        pivots += 1
        ei = flat // m
        ej = flat - ei * m

        # cycle walk to the LCA, tracking the leaving arc among sign -1 arcs
        x = ei
        y = n + ej
        n_cycle = 0
        theta = -1.0
        leave_slot = -1
        leave_key = 0
        while x != y:
            if depth[x] >= depth[y]:
                t = parent_arc[x]
                sign = -1.0 if x < n else 1.0
                x = parent[x]
            else:
                t = parent_arc[y]
                sign = 1.0 if y < n else -1.0
                y = parent[y]
            cyc_slot[n_cycle] = t
            cyc_sign[n_cycle] = sign
            n_cycle += 1
            if sign < 0.0:
                f = bf[t]
                key = bi[t] * m + bj[t]
                if leave_slot < 0 or f < theta or (f == theta and key < leave_key):
                    theta = f
                    leave_slot = t
                    leave_key = key

        degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
        for k in range(n_cycle):
            bf[cyc_slot[k]] += cyc_sign[k] * theta
        bi[leave_slot] = ei
        bj[leave_slot] = ej
        bf[leave_slot] = theta

    plan_arr = np.zeros((n, m), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] plan = plan_arr
    for t in range(n_basic):
        plan[bi[t], bj[t]] = bf[t]
    return plan_arr, pivots, status
