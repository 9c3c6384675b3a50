"""Bounded-variable primal simplex for LP relaxations."""

from .core import (
    INFEASIBLE,
    OPTIMAL,
    LpProblem,
    LpResult,
    LpWorkspace,
    RelaxationInfeasibleError,
    SimplexNumericalError,
    backend,
    make_workspace,
    objective_bounds,
    solve_lp,
    solve_with,
)

__all__ = [
    "LpProblem",
    "LpResult",
    "LpWorkspace",
    "OPTIMAL",
    "INFEASIBLE",
    "RelaxationInfeasibleError",
    "SimplexNumericalError",
    "backend",
    "make_workspace",
    "objective_bounds",
    "solve_lp",
    "solve_with",
]
