"""Sizing optimisation: model assembly, branch and bound, oracle, checks."""

from .bnb import solve_bnb
from .check import ConstraintViolation, check_solution, periodicity_residuals
from .oracle import OracleLimitExceeded, brute_force_oracle
from .problem import Layout, SizingProblem, assemble, synthetic_hours
from .solution import (INFEASIBLE, NOT_PROVEN, OPTIMAL, SizingSolution, SolverStats,
                       dispatch_from_x, dump_solution, load_solution, recompute_net_profit)

__all__ = [
    "ConstraintViolation", "INFEASIBLE", "Layout", "NOT_PROVEN", "OPTIMAL",
    "OracleLimitExceeded", "SizingProblem", "SizingSolution", "SolverStats",
    "assemble", "brute_force_oracle", "check_solution", "dispatch_from_x",
    "dump_solution", "load_solution", "periodicity_residuals",
    "recompute_net_profit", "solve_bnb", "synthetic_hours",
]
