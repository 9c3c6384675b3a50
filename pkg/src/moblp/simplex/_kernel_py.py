"""Pure-Python bounded-variable two-phase primal simplex kernel.

Reference implementation of the pivoting loop; the compiled twin in
``_kernel_cy.pyx`` follows the same pivot rules so both backends take the
same pivot sequences up to floating-point reduction order.

Problem form: minimize cost . x subject to W x = b and lb <= x <= ub,
where W already contains one slack column per row at position
``n_struct + r`` with coefficient +1 (rows built from <= or =) or -1
(rows built from >=); equality rows carry a slack fixed to [0, 0].
Artificial variables are managed internally.

Pivot rules (all deterministic):
  entering: largest-violation (Dantzig) with lowest index on ties,
            switching to Bland's lowest-index rule after ``bland_after``
            iterations to guarantee termination;
  leaving:  minimum-ratio, ties resolved to the smallest basic variable
            index, pivots preferred over bound flips on ties.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_NUMERICAL = 2

_NB_LB = 0
_NB_UB = 1
_BASIC = 2


def solve_bounded(W, b, cost, lb, ub, n_struct, tol_feas=1e-7, pivot_tol=1e-9,
                  bland_after=0, max_iter=0):
    """Run the two-phase simplex; returns (status, x, objective, iterations).

    ``x`` has one entry per column of W (structurals then slacks) and is
    meaningful only when status is STATUS_OPTIMAL.
    """
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, N = W.shape
    NT = N + m
    if bland_after <= 0:
        bland_after = 100 + 10 * (m + NT)
    if max_iter <= 0:
        max_iter = 10000 + 100 * (m + NT)

    T = np.zeros((m, NT))
    T[:, :N] = W
    lbf = np.concatenate([lb, np.zeros(m)])
    ubf = np.concatenate([ub, np.zeros(m)])
    cost2 = np.concatenate([cost, np.zeros(m)])
    cost1 = np.zeros(NT)

    status = np.full(NT, _NB_LB, dtype=np.int64)
    basis = np.empty(m, dtype=np.int64)
    xb = np.empty(m)

    # initial point: every nonbasic variable sits at its lower bound
    resid = b - W @ lbf[:N]
    need_phase1 = False
    for r in range(m):
        s = n_struct + r
        sgn = T[r, s]
        sval = resid[r] / sgn
        if lbf[s] - tol_feas <= sval <= ubf[s] + tol_feas:
            basis[r] = s
            status[s] = _BASIC
            xb[r] = sval
            if sgn < 0.0:
                T[r, :] = -T[r, :]
        else:
            a = N + r
            asgn = 1.0 if resid[r] >= 0.0 else -1.0
            T[r, a] = asgn
            if asgn < 0.0:
                T[r, :] = -T[r, :]
            basis[r] = a
            status[a] = _BASIC
            xb[r] = abs(resid[r])
            ubf[a] = np.inf
            cost1[a] = 1.0
            need_phase1 = True
    # rows whose slack entered the basis keep their artificial pinned at 0

    iters = 0

    def run_phase(c_phase):
        nonlocal iters
        d = c_phase.copy()
        cb = c_phase[basis]
        if np.any(cb != 0.0):
            d -= cb @ T
        d[basis] = 0.0
        fixed = lbf == ubf
        while True:
            at_lb = status == _NB_LB
            at_ub = status == _NB_UB
            score = np.where(at_lb, -d, 0.0) + np.where(at_ub, d, 0.0)
            score[fixed] = 0.0
            score[status == _BASIC] = 0.0
            if iters >= bland_after:
                eligible = score > pivot_tol
                if not eligible.any():
                    return STATUS_OPTIMAL
                e = int(np.argmax(eligible))
            else:
                e = int(np.argmax(score))
                if score[e] <= pivot_tol:
                    return STATUS_OPTIMAL
            iters += 1
            if iters > max_iter:
                return STATUS_NUMERICAL

            sigma = 1.0 if status[e] == _NB_LB else -1.0
            y = T[:, e].copy()

            t_cur = ubf[e] - lbf[e]
            leave = -1
            for i in range(m):
                yi = sigma * y[i]
                bi = basis[i]
                if yi > pivot_tol:
                    ti = (xb[i] - lbf[bi]) / yi
                elif yi < -pivot_tol:
                    if ubf[bi] == np.inf:
                        continue
                    ti = (ubf[bi] - xb[i]) / (-yi)
                else:
                    continue
                if ti < 0.0:
                    ti = 0.0
                if ti < t_cur - 1e-9:
                    t_cur = ti
                    leave = i
                elif ti <= t_cur + 1e-9:
                    if leave == -1 or bi < basis[leave]:
                        leave = i
                        if ti < t_cur:
                            t_cur = ti
            if not np.isfinite(t_cur):
                return STATUS_NUMERICAL

            if leave == -1:
                # bound flip: e travels to its other bound, basis unchanged
                xb[:] -= sigma * t_cur * y
                status[e] = _NB_UB if status[e] == _NB_LB else _NB_LB
                continue

            enter_val = (lbf[e] if status[e] == _NB_LB else ubf[e]) + sigma * t_cur
            xb[:] -= sigma * t_cur * y
            xb[leave] = enter_val
            lv = basis[leave]
            status[lv] = _NB_LB if sigma * y[leave] > 0.0 else _NB_UB
            basis[leave] = e
            status[e] = _BASIC

            piv = y[leave]
            trow = T[leave, :] / piv
            T[:, :] -= np.outer(T[:, e], trow)
            T[leave, :] = trow
            de = d[e]
            if de != 0.0:
                d[:] -= de * trow
            d[e] = 0.0

    if need_phase1:
        st = run_phase(cost1)
        if st != STATUS_OPTIMAL:
            return st, np.empty(0), 0.0, iters
        art_sum = 0.0
        for r in range(m):
            if basis[r] >= N:
                art_sum += abs(xb[r])
        if art_sum > tol_feas * (1.0 + float(np.abs(b).sum())):
            return STATUS_INFEASIBLE, np.empty(0), 0.0, iters
        # drive remaining zero-valued artificials out of the basis where possible
        for r in range(m):
            if basis[r] < N:
                continue
            pivot_col = -1
            for j in range(N):
                if status[j] != _BASIC and lbf[j] < ubf[j] and abs(T[r, j]) > pivot_tol:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue  # redundant row: artificial stays basic, pinned at 0
            lv = basis[r]
            # zero-step basis exchange: no variable moves, the entering
            # column becomes basic at the bound it currently rests on
            enter_val = lbf[pivot_col] if status[pivot_col] == _NB_LB else ubf[pivot_col]
            status[lv] = _NB_LB
            basis[r] = pivot_col
            status[pivot_col] = _BASIC
            piv = T[r, pivot_col]
            trow = T[r, :] / piv
            T -= np.outer(T[:, pivot_col], trow)
            T[r, :] = trow
            xb[r] = enter_val
        ubf[N:] = 0.0

    st = run_phase(cost2)
    if st != STATUS_OPTIMAL:
        return st, np.empty(0), 0.0, iters

    x = np.where(status[:NT] == _NB_UB, ubf, lbf)
    x[basis] = xb
    x = x[:N]
    # guard against tableau drift
    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    if float(np.abs(W @ x - b).max(initial=0.0)) > 100.0 * tol_feas * scale:
        return STATUS_NUMERICAL, np.empty(0), 0.0, iters
    return STATUS_OPTIMAL, x, float(cost @ x), iters
