# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled min-plus selection used by the deadline DP."""
from libc.math cimport INFINITY


def minplus_select(const double[::1] tx, long long j0, const double[::1] parent,
                   double[::1] out_cost, long long[::1] out_j):
    """out_cost[k] = min_t tx[t] + parent[k - j0 - t] over indices >= 1.

    ``out_j[k]`` receives the winning slot ``j0 + t`` (smallest on ties) or -1.
    Arrays are indexed 0..K with entry 0 unused.
    """
    cdef Py_ssize_t K = parent.shape[0] - 1
    cdef Py_ssize_t J = tx.shape[0]
    cdef Py_ssize_t k, t, idx
    cdef double best, v
    cdef long long bj
    out_cost[0] = INFINITY
    out_j[0] = -1
    for k in range(1, K + 1):
        best = INFINITY
        bj = -1
        for t in range(J):
            idx = k - j0 - t
            if idx < 1:
                break
            v = tx[t] + parent[idx]
            if v < best:
                best = v
                bj = j0 + t
        out_cost[k] = best
        out_j[k] = bj
