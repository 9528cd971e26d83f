# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled slot-loop and Bellman-backup kernels.

Must stay arithmetically identical to ``ffpower._fallback``: same operation
order, no fast-math, so both backends return bit-equal results.
"""

import numpy as np

from libc.math cimport sqrt, floor

cdef int KIND_FRACTION = 0
cdef int KIND_TABLE = 1


cdef long _simulate(int kind, double q,
                    const double[::1] table_theta, const double[::1] table_power,
                    double table_step, const double[::1] arrivals, long horizon,
                    double B, double s, double c, double eps, long burn_in,
                    double* total_out) noexcept nogil:
    cdef double b = B
    cdef double consumed = 0.0
    cdef double total = 0.0
    cdef double root = sqrt(eps * c)
    cdef double budget, theta, g, d
    cdef double tol = 1e-9 * B
    cdef long t, i
    cdef long last = table_theta.shape[0] - 1
    for t in range(horizon):
        if t > 0:
            b = b - consumed
            if b < 0.0:
                b = 0.0
            b = b + arrivals[t - 1]
            if b > B:
                b = B
        if kind == KIND_FRACTION:
            budget = q * b
            if eps == 0.0:
                theta = 1.0
                g = budget
            else:
                theta = budget / (eps + root)
                if theta > 1.0:
                    theta = 1.0
                g = budget - eps
                if g < root:
                    g = root
            consumed = budget
        else:
            i = <long>floor(b / table_step + 1e-9)
            if i > last:
                i = last
            theta = table_theta[i]
            g = table_power[i]
            consumed = theta * (eps + g)
            if consumed > b + tol:
                total_out[0] = total
                return t
        d = (1.0 - theta) * s + theta * (s / (1.0 + g / c))
        if t >= burn_in:
            total = total + d
    total_out[0] = total
    return -1


def simulate(int kind, double q, table_theta, table_power, double table_step,
             arrivals, long horizon, double B, double s, double c, double eps,
             long burn_in):
    """Run one trajectory; return ``(sum of post-burn-in distortions, violation slot or -1)``."""
    cdef const double[::1] tt = np.ascontiguousarray(table_theta, dtype=np.float64)
    cdef const double[::1] tp = np.ascontiguousarray(table_power, dtype=np.float64)
    cdef const double[::1] arr = np.ascontiguousarray(arrivals, dtype=np.float64)
    cdef double total = 0.0
    cdef long bad
    if arr.shape[0] < horizon - 1:
        raise ValueError("need at least horizon - 1 arrivals")
    with nogil:
        bad = _simulate(kind, q, tt, tp, table_step, arr, horizon, B, s, c, eps,
                        burn_in, &total)
    return total, bad


def bellman(cost, w):
    """Min-plus backup ``V[i] = min_{j<=i} cost[j] + w[i-j]``; ties go to the smallest j."""
    cdef const double[::1] cv = np.ascontiguousarray(cost, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = cv.shape[0]
    out = np.empty(n, dtype=np.float64)
    arg = np.empty(n, dtype=np.int64)
    cdef double[::1] ov = out
    cdef long long[::1] av = arg
    cdef Py_ssize_t i, j, best_j
    cdef double best, val
    with nogil:
        for i in range(n):
            best = cv[0] + wv[i]
            best_j = 0
            for j in range(1, i + 1):
                val = cv[j] + wv[i - j]
                if val < best:
                    best = val
                    best_j = j
            ov[i] = best
            av[i] = best_j
    return out, arg
