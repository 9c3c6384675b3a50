# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dual sweep for the multiclass SVM trainer.

Mirrors ``learn._run_epoch_py``: visit examples in the given order, solve
each example's dual block exactly by the sorted water-filling step, update
the weight rows in place, and report the largest KKT violation seen.
"""

import numpy as np

from libc.math cimport INFINITY, fabs


def run_epoch(double[:, ::1] X, long[::1] y0, double[:, ::1] U,
              double[:, ::1] alpha, double[:, ::1] W, double[::1] sqnorm,
              long[::1] perm):
    cdef Py_ssize_t N = X.shape[0]
    cdef Py_ssize_t k = X.shape[1]
    cdef Py_ssize_t p = W.shape[0]

    grad_arr = np.empty(p)
    B_arr = np.empty(p)
    D_arr = np.empty(p)
    v_arr = np.empty(p)
    order_arr = np.empty(p, dtype=np.int64)
    cdef double[::1] grad = grad_arr
    cdef double[::1] B = B_arr
    cdef double[::1] D = D_arr
    cdef double[::1] v = v_arr
    cdef long[::1] order = order_arr

    cdef Py_ssize_t idx, i, m, j, r, pos, chosen
    cdef double q, dot, gmax, gmin_open, viol, worst, total_U
    cdef double sum_B, sum_U_out, theta, hi, lo, delta
    cdef long tmp
    cdef bint found, any_open

    worst = 0.0
    with nogil:
        for idx in range(N):
            i = perm[idx]
            q = sqnorm[i]
            if q < 1e-12:
                continue

            gmax = -INFINITY
            gmin_open = INFINITY
            any_open = False
            for m in range(p):
                dot = 0.0
                for j in range(k):
                    dot += W[m, j] * X[i, j]
                if m != y0[i]:
                    dot += 1.0
                grad[m] = dot
                if dot > gmax:
                    gmax = dot
                if alpha[i, m] < U[i, m] - 1e-12:
                    any_open = True
                    if dot < gmin_open:
                        gmin_open = dot
            viol = gmax - gmin_open if any_open else 0.0
            if viol > worst:
                worst = viol
            if viol < 1e-12:
                continue

            total_U = 0.0
            for m in range(p):
                B[m] = grad[m] - q * alpha[i, m]
                D[m] = B[m] + q * U[i, m]
                total_U += U[i, m]
                order[m] = m
            # stable insertion sort, descending by D
            for m in range(1, p):
                tmp = order[m]
                pos = m
                while pos > 0 and D[order[pos - 1]] < D[tmp]:
                    order[pos] = order[pos - 1]
                    pos -= 1
                order[pos] = tmp

            sum_B = 0.0
            sum_U_out = total_U
            found = False
            for r in range(1, p + 1):
                sum_B += B[order[r - 1]]
                sum_U_out -= U[i, order[r - 1]]
                theta = (sum_B - q * sum_U_out) / r
                hi = D[order[r - 1]]
                lo = D[order[r]] if r < p else -INFINITY
                if (lo <= theta < hi) or (theta == hi and r == 1):
                    for m in range(p):
                        v[m] = U[i, m]
                    for pos in range(r):
                        chosen = order[pos]
                        v[chosen] = (theta - B[chosen]) / q
                    found = True
                    break
            if not found:
                theta = 0.0
                for m in range(p):
                    theta += B[m]
                theta /= p
                for m in range(p):
                    v[m] = (theta - B[m]) / q
                    if v[m] > U[i, m]:
                        v[m] = U[i, m]

            for m in range(p):
                delta = v[m] - alpha[i, m]
                if fabs(delta) > 1e-15:
                    for j in range(k):
                        W[m, j] += delta * X[i, j]
                    alpha[i, m] = v[m]
    return worst
