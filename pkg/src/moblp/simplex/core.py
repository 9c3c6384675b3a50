"""LP relaxation solver built on the bounded-variable simplex kernel.

At import time the compiled Cython kernel is preferred; the pure-Python
kernel is used when the extension is missing or when the environment
variable ``MOBLP_PURE_PYTHON`` is set to a nonempty value.  Both kernels
implement the same pivot rules; :func:`backend` reports which one is live.

Default tolerances: feasibility 1e-7, objective 1e-7.  Bland's rule
engages automatically after an iteration threshold inside the kernel.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

if os.environ.get("MOBLP_PURE_PYTHON"):
    from . import _kernel_py as _kernel
else:
    try:
        from . import _kernel_cy as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _kernel

from .._senses import EQ, GE, LE

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

TOL_FEAS = 1e-7
TOL_OBJ = 1e-7


class SimplexNumericalError(RuntimeError):
    """Pivoting failed to terminate; signals a bug or pathological input."""


class RelaxationInfeasibleError(RuntimeError):
    """The LP relaxation is empty, so the binary instance is infeasible too."""


def backend() -> str:
    """Name of the active kernel: ``"cython"`` or ``"python"``."""
    return _kernel.BACKEND


@dataclass(frozen=True)
class LpProblem:
    """min c.x subject to A x (sense) b and lb <= x <= ub (defaults [0,1])."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    sense: tuple[str, ...]
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None


@dataclass(frozen=True)
class LpResult:
    status: str
    value: float
    x: np.ndarray


@dataclass(frozen=True)
class LpWorkspace:
    """Constraint structure shared across solves that differ only in
    objective, right-hand side, or variable bounds (used per branch-and-bound
    node and across criterion-space iterations)."""

    n: int
    m: int
    W: np.ndarray         # (m, n + m): A plus signed slack columns
    slack_lb: np.ndarray
    slack_ub: np.ndarray


def make_workspace(A, sense) -> LpWorkspace:
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    W = np.zeros((m, n + m))
    W[:, :n] = A
    slack_lb = np.zeros(m)
    slack_ub = np.zeros(m)
    for r, s in enumerate(sense):
        if s == LE:
            W[r, n + r] = 1.0
            slack_ub[r] = np.inf
        elif s == GE:
            W[r, n + r] = -1.0
            slack_ub[r] = np.inf
        elif s == EQ:
            W[r, n + r] = 1.0  # slack fixed to zero
        else:
            raise ValueError(f"unknown sense token {s!r}")
    return LpWorkspace(n=n, m=m, W=W, slack_lb=slack_lb, slack_ub=slack_ub)


def solve_with(ws: LpWorkspace, c, b, lb, ub, tol_feas=TOL_FEAS) -> LpResult:
    """Solve min c.x over the workspace constraints with the given bounds."""
    cost = np.zeros(ws.n + ws.m)
    cost[: ws.n] = c
    lbf = np.concatenate([np.asarray(lb, dtype=np.float64), ws.slack_lb])
    ubf = np.concatenate([np.asarray(ub, dtype=np.float64), ws.slack_ub])
    status, x, obj, _ = _kernel.solve_bounded(
        ws.W, np.asarray(b, dtype=np.float64), cost, lbf, ubf, ws.n,
        tol_feas, 1e-9, 0, 0,
    )
    if status == _kernel.STATUS_NUMERICAL:
        raise SimplexNumericalError(
            f"simplex did not terminate on a {ws.m}x{ws.n} problem"
        )
    if status == _kernel.STATUS_INFEASIBLE:
        return LpResult(INFEASIBLE, 0.0, np.empty(0))
    return LpResult(OPTIMAL, float(obj), x[: ws.n])


def solve_lp(prob: LpProblem) -> LpResult:
    """Solve a standalone problem (builds a throwaway workspace)."""
    n = len(prob.c)
    lb = prob.lb if prob.lb is not None else np.zeros(n)
    ub = prob.ub if prob.ub is not None else np.ones(n)
    ws = make_workspace(prob.A, prob.sense)
    return solve_with(ws, prob.c, prob.b, lb, ub)


def objective_bounds(inst, i: int) -> tuple[float, float]:
    """LP-relaxation range [l, u] of objective i (1-based) over the instance.

    l minimizes c_i over the relaxation, u maximizes it (solved as the
    negated minimum).  Raises :class:`RelaxationInfeasibleError` when the
    relaxation is empty, in which case the binary instance is infeasible.
    """
    if not 1 <= i <= inst.p:
        raise ValueError(f"objective index {i} out of range 1..{inst.p}")
    c = inst.C[i - 1]
    ws = make_workspace(inst.A, inst.sense)
    lb = np.zeros(inst.n)
    ub = np.ones(inst.n)
    low = solve_with(ws, c, inst.b, lb, ub)
    if low.status == INFEASIBLE:
        raise RelaxationInfeasibleError(f"relaxation of {inst.id or 'instance'} is empty")
    high = solve_with(ws, -c, inst.b, lb, ub)
    return low.value, -high.value
