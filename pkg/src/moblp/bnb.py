"""Exact 0-1 integer programming by branch and bound over LP relaxations.

Serves as the single-objective solver behind the criterion-space search.
Node counts are the machine-independent effort metric: ``nodes_expanded``
is the number of LP relaxations solved, which is deterministic for a given
query on a given backend.

Search rules: branch on the most fractional variable (ties to the lowest
index), explore nodes best-bound-first with FIFO tie-break.  For queries
whose objective, matrix and right-hand side are all integral, pruning uses
the rounded-up relaxation bound, which makes optimality exact rather than
tolerance-based.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from ._senses import EQ, GE, LE
from . import simplex
from .simplex import INFEASIBLE, OPTIMAL, LpWorkspace

INT_TOL = 1e-6
BRUTE_FORCE_MAX_N = 22


@dataclass(frozen=True)
class IlpQuery:
    """min objective . x over binary x with A x (sense) b.

    Criterion-space cuts are ordinary rows of A.  ``cutoff`` is an optional
    objective value known to be attainable elsewhere; it may speed pruning
    but never changes the returned optimum.
    """

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    sense: tuple[str, ...]
    cutoff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "objective", np.asarray(self.objective, dtype=np.float64))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=np.float64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))
        object.__setattr__(self, "sense", tuple(self.sense))

    @property
    def n(self) -> int:
        return self.objective.shape[0]

    def all_integral(self) -> bool:
        return bool(
            np.all(self.objective == np.round(self.objective))
            and np.all(self.A == np.round(self.A))
            and np.all(self.b == np.round(self.b))
        )


@dataclass(frozen=True)
class IlpResult:
    status: str
    value: float
    x: np.ndarray
    nodes_expanded: int


def _row_feasible(A, b, sense, x, tol):
    vals = A @ x if A.size else np.zeros(len(b))
    for r, s in enumerate(sense):
        if s == LE and vals[r] > b[r] + tol:
            return False
        if s == GE and vals[r] < b[r] - tol:
            return False
        if s == EQ and abs(vals[r] - b[r]) > tol:
            return False
    return True


def solve_ilp(q: IlpQuery, workspace: LpWorkspace | None = None) -> IlpResult:
    """Exact minimum of the query; see the module docstring for search rules."""
    n = q.n
    ws = workspace if workspace is not None else simplex.make_workspace(q.A, q.sense)
    integral_data = q.all_integral()
    feas_tol = 1e-6 if not integral_data else 0.5  # integral check is exact below

    result = _search(q, ws, n, integral_data, q.cutoff)
    if result.status == INFEASIBLE and q.cutoff is not None:
        # the cutoff may have pruned the whole tree; certify without it
        retry = _search(q, ws, n, integral_data, None)
        return IlpResult(
            retry.status, retry.value, retry.x,
            result.nodes_expanded + retry.nodes_expanded,
        )
    return result


def _search(q, ws, n, integral_data, cutoff):
    best_x = None
    best_val = np.inf
    best_int = None  # rounded objective value when data is integral
    cut_int = None
    if cutoff is not None:
        if integral_data:
            cut_int = int(np.floor(cutoff + INT_TOL))
        else:
            best_val = float(cutoff)

    nodes = 0
    seq = 0
    root_lb = np.zeros(n)
    root_ub = np.ones(n)
    heap = [(-np.inf, 0, root_lb, root_ub)]
    seq += 1

    while heap:
        bound, _, lb, ub = heapq.heappop(heap)
        if best_x is not None or cut_int is not None:
            if integral_data:
                limit = best_int if best_int is not None else np.inf
                if cut_int is not None:
                    limit = min(limit, cut_int + 1)
                if bound > -np.inf and int(np.ceil(bound - INT_TOL)) >= limit:
                    continue
            elif bound >= best_val - 1e-9:
                continue

        res = simplex.solve_with(ws, q.objective, q.b, lb, ub)
        nodes += 1
        if res.status == INFEASIBLE:
            continue
        value = res.value
        if integral_data:
            vbound = int(np.ceil(value - INT_TOL))
            limit = best_int if best_int is not None else np.inf
            if cut_int is not None:
                limit = min(limit, cut_int + 1)
            if vbound >= limit:
                continue
        elif value >= best_val - 1e-9:
            continue

        x = res.x
        frac = np.abs(x - np.round(x))
        if np.all(frac <= INT_TOL):
            xi = np.round(x)
            # LP tolerance can round onto an infeasible point; verify truly
            # (for integral data this comparison is exact integer arithmetic)
            if not _row_feasible(q.A, q.b, q.sense, xi, 1e-7):
                # treat as fractional: branch on the first free variable
                j = _first_free(lb, ub)
                if j < 0:
                    continue
            else:
                val = float(q.objective @ xi)
                if integral_data:
                    vi = int(np.round(val))
                    if best_int is None or vi < best_int:
                        best_int, best_val, best_x = vi, float(vi), xi
                elif val < best_val:
                    best_val, best_x = val, xi
                continue
        else:
            # most fractional: largest distance to the nearest integer
            dist = np.minimum(x - np.floor(x), np.ceil(x) - x)
            dist[lb == ub] = -1.0
            j = int(np.argmax(dist))

        for fixval in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = fixval
            heapq.heappush(heap, (value, seq, clb, cub))
            seq += 1

    if best_x is None:
        return IlpResult(INFEASIBLE, 0.0, np.empty(0), nodes)
    return IlpResult(OPTIMAL, best_val, best_x.astype(np.int64), nodes)


def _first_free(lb, ub):
    free = np.nonzero(lb < ub)[0]
    return int(free[0]) if free.size else -1


def brute_force_ilp(q: IlpQuery) -> IlpResult:
    """Enumerate all 2^n binary vectors; the test oracle for solve_ilp.

    Vector k assigns bit j of k to x_j (x_0 is the least significant bit),
    and ties in the optimum resolve to the smallest k.
    """
    n = q.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"enumeration guard: n={n} exceeds {BRUTE_FORCE_MAX_N}")
    tol = 1e-9 if q.all_integral() else 1e-7
    best_val = np.inf
    best_x = None
    chunk = 1 << 14
    total = 1 << n
    codes = np.arange(total, dtype=np.int64)
    for start in range(0, total, chunk):
        block = codes[start : start + chunk]
        X = ((block[:, None] >> np.arange(n)) & 1).astype(np.float64)
        ok = np.ones(len(block), dtype=bool)
        if q.A.size:
            V = X @ q.A.T
            for r, s in enumerate(q.sense):
                if s == LE:
                    ok &= V[:, r] <= q.b[r] + tol
                elif s == GE:
                    ok &= V[:, r] >= q.b[r] - tol
                else:
                    ok &= np.abs(V[:, r] - q.b[r]) <= tol
        else:
            for r, s in enumerate(q.sense):
                if s == LE:
                    ok &= 0.0 <= q.b[r] + tol
                elif s == GE:
                    ok &= 0.0 >= q.b[r] - tol
                else:
                    ok &= abs(q.b[r]) <= tol
        if not ok.any():
            continue
        vals = X[ok] @ q.objective
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_x = X[ok][k]
    if best_x is None:
        return IlpResult(INFEASIBLE, 0.0, np.empty(0), 0)
    return IlpResult(OPTIMAL, best_val, best_x.astype(np.int64), 0)
