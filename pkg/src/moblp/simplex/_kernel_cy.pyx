# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounded-variable two-phase primal simplex kernel.

Mirrors ``_kernel_py`` rule for rule (entering, ratio test, tie-breaks,
drive-out of artificials) so the two backends are interchangeable; see
that module's docstring for the algorithm description.
"""

import numpy as np

from libc.math cimport INFINITY, fabs

BACKEND = "cython"

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_NUMERICAL = 2

cdef int _NB_LB = 0
cdef int _NB_UB = 1
cdef int _BASIC = 2

cdef double RATIO_TIE = 1e-9


cdef int _run_phase(double[:, ::1] T, double[::1] xb, long[::1] basis,
                    long[::1] status, double[::1] lbf, double[::1] ubf,
                    double[::1] c_phase, double[::1] d,
                    long* iters, long bland_after, long max_iter,
                    double pivot_tol) nogil:
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t NT = T.shape[1]
    cdef Py_ssize_t j, r, i, e, leave, lv, bi
    cdef double best, sc, dj, sigma, yi, ti, t_cur, piv, de, enter_val
    cdef bint any_cb

    # reduced costs d = c - c_B . T
    any_cb = False
    for r in range(m):
        if c_phase[basis[r]] != 0.0:
            any_cb = True
            break
    for j in range(NT):
        d[j] = c_phase[j]
    if any_cb:
        for r in range(m):
            de = c_phase[basis[r]]
            if de != 0.0:
                for j in range(NT):
                    d[j] -= de * T[r, j]
    for r in range(m):
        d[basis[r]] = 0.0

    while True:
        # entering variable
        e = -1
        if iters[0] >= bland_after:
            for j in range(NT):
                if status[j] == _BASIC or lbf[j] == ubf[j]:
                    continue
                dj = d[j]
                if status[j] == _NB_LB:
                    sc = -dj
                else:
                    sc = dj
                if sc > pivot_tol:
                    e = j
                    break
        else:
            best = pivot_tol
            for j in range(NT):
                if status[j] == _BASIC or lbf[j] == ubf[j]:
                    continue
                dj = d[j]
                if status[j] == _NB_LB:
                    sc = -dj
                else:
                    sc = dj
                if sc > best:
                    best = sc
                    e = j
        if e < 0:
            return 0  # phase optimal
        iters[0] += 1
        if iters[0] > max_iter:
            return 2

        sigma = 1.0 if status[e] == _NB_LB else -1.0

        # ratio test
        t_cur = ubf[e] - lbf[e]
        leave = -1
        for i in range(m):
            yi = sigma * T[i, e]
            bi = basis[i]
            if yi > pivot_tol:
                ti = (xb[i] - lbf[bi]) / yi
            elif yi < -pivot_tol:
                if ubf[bi] == INFINITY:
                    continue
                ti = (ubf[bi] - xb[i]) / (-yi)
            else:
                continue
            if ti < 0.0:
                ti = 0.0
            if ti < t_cur - RATIO_TIE:
                t_cur = ti
                leave = i
            elif ti <= t_cur + RATIO_TIE:
                if leave == -1 or bi < basis[leave]:
                    leave = i
                    if ti < t_cur:
                        t_cur = ti
        if t_cur == INFINITY:
            return 2

        if leave == -1:
            # bound flip
            for i in range(m):
                xb[i] -= sigma * t_cur * T[i, e]
            status[e] = _NB_UB if status[e] == _NB_LB else _NB_LB
            continue

        enter_val = (lbf[e] if status[e] == _NB_LB else ubf[e]) + sigma * t_cur
        piv = T[leave, e]
        for i in range(m):
            xb[i] -= sigma * t_cur * T[i, e]
        xb[leave] = enter_val
        lv = basis[leave]
        status[lv] = _NB_LB if sigma * piv > 0.0 else _NB_UB
        basis[leave] = e
        status[e] = _BASIC

        for j in range(NT):
            T[leave, j] /= piv
        for i in range(m):
            if i == leave:
                continue
            de = T[i, e]
            if de != 0.0:
                for j in range(NT):
                    T[i, j] -= de * T[leave, j]
        de = d[e]
        if de != 0.0:
            for j in range(NT):
                d[j] -= de * T[leave, j]
        d[e] = 0.0


def solve_bounded(W, b, cost, lb, ub, n_struct, double tol_feas=1e-7,
                  double pivot_tol=1e-9, long bland_after=0, long max_iter=0):
    """Run the two-phase simplex; returns (status, x, objective, iterations)."""
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = Wv.shape[0]
    cdef Py_ssize_t N = Wv.shape[1]
    cdef Py_ssize_t NT = N + m
    cdef Py_ssize_t ns = n_struct
    if bland_after <= 0:
        bland_after = 100 + 10 * (m + NT)
    if max_iter <= 0:
        max_iter = 10000 + 100 * (m + NT)

    T_arr = np.zeros((m, NT))
    cdef double[:, ::1] T = T_arr
    cdef Py_ssize_t r, j, i
    for r in range(m):
        for j in range(N):
            T[r, j] = Wv[r, j]

    lbf_arr = np.concatenate([np.ascontiguousarray(lb, dtype=np.float64), np.zeros(m)])
    ubf_arr = np.concatenate([np.ascontiguousarray(ub, dtype=np.float64), np.zeros(m)])
    cost2_arr = np.concatenate([np.ascontiguousarray(cost, dtype=np.float64), np.zeros(m)])
    cost1_arr = np.zeros(NT)
    cdef double[::1] lbf = lbf_arr
    cdef double[::1] ubf = ubf_arr
    cdef double[::1] cost2 = cost2_arr
    cdef double[::1] cost1 = cost1_arr

    status_arr = np.full(NT, _NB_LB, dtype=np.int64)
    basis_arr = np.empty(m, dtype=np.int64)
    xb_arr = np.empty(m)
    d_arr = np.empty(NT)
    cdef long[::1] status = status_arr
    cdef long[::1] basis = basis_arr
    cdef double[::1] xb = xb_arr
    cdef double[::1] d = d_arr

    cdef double resid, sgn, sval, asgn, art_sum, bsum, scale, worst, v, piv, enter_val
    cdef Py_ssize_t s, a, lv, pivot_col
    cdef bint need_phase1 = False
    cdef long iters = 0
    cdef int st

    bsum = 0.0
    for r in range(m):
        resid = bv[r]
        for j in range(ns):
            if lbf[j] != 0.0:
                resid -= Wv[r, j] * lbf[j]
        bsum += fabs(bv[r])
        s = ns + r
        sgn = T[r, s]
        sval = resid / sgn
        if lbf[s] - tol_feas <= sval <= ubf[s] + tol_feas:
            basis[r] = s
            status[s] = _BASIC
            xb[r] = sval
            if sgn < 0.0:
                for j in range(NT):
                    T[r, j] = -T[r, j]
        else:
            a = N + r
            asgn = 1.0 if resid >= 0.0 else -1.0
            T[r, a] = asgn
            if asgn < 0.0:
                for j in range(NT):
                    T[r, j] = -T[r, j]
            basis[r] = a
            status[a] = _BASIC
            xb[r] = fabs(resid)
            ubf[a] = INFINITY
            cost1[a] = 1.0
            need_phase1 = True

    if need_phase1:
        with nogil:
            st = _run_phase(T, xb, basis, status, lbf, ubf, cost1, d,
                            &iters, bland_after, max_iter, pivot_tol)
        if st != 0:
            return STATUS_NUMERICAL, np.empty(0), 0.0, int(iters)
        art_sum = 0.0
        for r in range(m):
            if basis[r] >= N:
                art_sum += fabs(xb[r])
        if art_sum > tol_feas * (1.0 + bsum):
            return STATUS_INFEASIBLE, np.empty(0), 0.0, int(iters)
        for r in range(m):
            if basis[r] < N:
                continue
            pivot_col = -1
            for j in range(N):
                if status[j] != _BASIC and lbf[j] < ubf[j] and fabs(T[r, j]) > pivot_tol:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # redundant row: artificial stays basic, pinned at 0
            lv = basis[r]
            enter_val = lbf[pivot_col] if status[pivot_col] == _NB_LB else ubf[pivot_col]
            status[lv] = _NB_LB
            basis[r] = pivot_col
            status[pivot_col] = _BASIC
            piv = T[r, pivot_col]
            for j in range(NT):
                T[r, j] /= piv
            for i in range(m):
                if i == r:
                    continue
                v = T[i, pivot_col]
                if v != 0.0:
                    for j in range(NT):
                        T[i, j] -= v * T[r, j]
            xb[r] = enter_val
        for r in range(m):
            ubf[N + r] = 0.0

    with nogil:
        st = _run_phase(T, xb, basis, status, lbf, ubf, cost2, d,
                        &iters, bland_after, max_iter, pivot_tol)
    if st == 2:
        return STATUS_NUMERICAL, np.empty(0), 0.0, int(iters)

    x_arr = np.empty(N)
    cdef double[::1] x = x_arr
    for j in range(N):
        x[j] = ubf[j] if status[j] == _NB_UB else lbf[j]
    for r in range(m):
        if basis[r] < N:
            x[basis[r]] = xb[r]

    scale = 1.0
    worst = 0.0
    for r in range(m):
        if fabs(bv[r]) + 1.0 > scale:
            scale = 1.0 + fabs(bv[r])
        v = -bv[r]
        for j in range(N):
            v += Wv[r, j] * x[j]
        if fabs(v) > worst:
            worst = fabs(v)
    if worst > 100.0 * tol_feas * scale:
        return STATUS_NUMERICAL, np.empty(0), 0.0, int(iters)

    cdef double obj = 0.0
    for j in range(ns):
        obj += cost2[j] * x[j]
    return STATUS_OPTIMAL, x_arr, obj, int(iters)
