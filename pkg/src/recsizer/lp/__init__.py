"""Dense/sparse linear programming on a bounded-variable revised simplex."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .. import _kernels as K
from .simplex import (INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED,
                      NumericalError, Simplex)

LE, EQ, GE = "<=", "=", ">="
_SENSE_ALIASES = {"<=": LE, "<": LE, "L": LE, "=": EQ, "==": EQ, "E": EQ, ">=": GE, ">": GE, "G": GE}


class StructureError(ValueError):
    """Inconsistent dimensions or bounds in a :class:`LinearProgram`."""


class StateError(RuntimeError):
    """Operation not defined for a solution in this state."""


@dataclass(frozen=True)
class LinearProgram:
    """``max (or min) c.x  s.t.  A x (<=,=,>=) b,  lo <= x <= hi``."""

    c: np.ndarray
    A: object
    senses: tuple
    b: np.ndarray
    lo: np.ndarray = None
    hi: np.ndarray = None
    sense: str = "max"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64).ravel()
        n = c.size
        A = self.A
        if A is None:
            A = sp.csr_matrix((0, n))
        if sp.issparse(A):
            A = sp.csr_matrix(A, dtype=np.float64)
        else:
            A = np.atleast_2d(np.asarray(A, dtype=np.float64))
            if A.size == 0:
                A = A.reshape(0, n)
        m = A.shape[0]
        if A.shape[1] != n:
            raise StructureError(f"A has {A.shape[1]} columns but c has {n} entries")
        b = np.asarray(self.b, dtype=np.float64).ravel()
        if b.size != m:
            raise StructureError(f"b has {b.size} entries for {m} rows")
        try:
            senses = tuple(_SENSE_ALIASES[s] for s in self.senses)
        except KeyError as exc:
            raise StructureError(f"unknown row sense {exc.args[0]!r}") from None
        if len(senses) != m:
            raise StructureError(f"{len(senses)} senses for {m} rows")
        lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=np.float64).ravel()
        hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=np.float64).ravel()
        if lo.size != n or hi.size != n:
            raise StructureError("bound vectors must match the number of columns")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise StructureError("variable bounds must satisfy lo <= hi")
        if np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise StructureError("lower bound +inf or upper bound -inf")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(b))):
            raise StructureError("c and b must be finite")
        if self.sense not in ("max", "min"):
            raise StructureError("sense must be 'max' or 'min'")
        for name, val in (("c", c), ("A", A), ("senses", senses), ("b", b), ("lo", lo), ("hi", hi)):
            object.__setattr__(self, name, val)

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LPSolution:
    status: str
    x: np.ndarray = None
    y: np.ndarray = None
    objective: float = float("nan")
    reduced_costs: np.ndarray = None
    iterations: int = 0
    # internal: full basis state for re-solves with edited bounds
    _state: tuple = field(default=None, repr=False)

    @property
    def optimal(self):
        return self.status == OPTIMAL


def _slack_bounds(senses):
    m = len(senses)
    lo = np.zeros(m)
    hi = np.zeros(m)
    for i, s in enumerate(senses):
        if s == LE:
            hi[i] = np.inf
        elif s == GE:
            lo[i] = -np.inf
    return lo, hi


def build_engine(lp, **opts):
    """Instantiate a :class:`Simplex` for ``lp`` (minimisation form)."""
    slo, shi = _slack_bounds(lp.senses)
    cost = -lp.c if lp.sense == "max" else lp.c
    A, b = lp.A, lp.b
    if A.shape[0] == 0:
        # a single empty <= row keeps the basis machinery non-degenerate in shape
        A, b = sp.csr_matrix((1, lp.c.size)), np.zeros(1)
        slo, shi = np.zeros(1), np.full(1, np.inf)
    return Simplex(
        A, b, cost,
        np.concatenate([lp.lo, slo]), np.concatenate([lp.hi, shi]),
        **opts,
    )


def solution_from_engine(lp, eng):
    n = lp.c.size
    status = eng.status
    if status != OPTIMAL:
        return LPSolution(status=status, iterations=eng.iterations,
                          _state=(eng.basis.copy(), eng.vstat.copy()))
    sign = -1.0 if lp.sense == "max" else 1.0
    m = lp.A.shape[0]
    x = eng.x[:n].copy()
    y = sign * eng.y[:m]
    d = sign * np.concatenate([eng.d[:n], eng.d[n:n + m]])
    return LPSolution(
        status=OPTIMAL, x=x, y=y, objective=float(lp.c @ x),
        reduced_costs=d, iterations=eng.iterations,
        _state=(eng.basis.copy(), eng.vstat.copy()),
    )


def solve_lp(lp, **opts):
    """Solve ``lp`` from a slack basis.

    Returns an :class:`LPSolution` whose status is ``Optimal``,
    ``Infeasible`` or ``Unbounded`` (``IterationLimit`` only when a limit in
    ``opts`` is hit).  Raises :class:`NumericalError` on basis breakdown.
    """
    if not isinstance(lp, LinearProgram):
        raise StructureError("solve_lp expects a LinearProgram")
    if lp.c.size == 0:
        return LPSolution(status=OPTIMAL, x=np.zeros(0), y=np.zeros(lp.A.shape[0]),
                          objective=0.0, reduced_costs=np.zeros(lp.A.shape[0]))
    eng = build_engine(lp, **opts)
    eng.solve()
    return solution_from_engine(lp, eng)


def row_activity(lp, x):
    return np.asarray(lp.A @ x).ravel()


def primal_residual(lp, x):
    """Largest violation of any row or bound at ``x``."""
    ax = row_activity(lp, x)
    res = 0.0
    for s, code in ((LE, 1), (GE, -1)):
        mask = np.array([t == s for t in lp.senses], dtype=bool)
        if mask.any():
            res = max(res, float(np.max(code * (ax[mask] - lp.b[mask]), initial=0.0)))
    eq = np.array([t == EQ for t in lp.senses], dtype=bool)
    if eq.any():
        res = max(res, float(np.max(np.abs(ax[eq] - lp.b[eq]))))
    res = max(res, float(np.max(lp.lo - x, initial=0.0)), float(np.max(x - lp.hi, initial=0.0)))
    return res


def _full_reduced(lp, sol):
    """Reduced costs and values for structurals followed by slacks."""
    n = lp.c.size
    slo, shi = _slack_bounds(lp.senses)
    xs = lp.b - row_activity(lp, sol.x)
    d = np.concatenate([lp.c - np.asarray(lp.A.T @ sol.y).ravel(), -sol.y])
    vals = np.concatenate([sol.x, xs])
    lo = np.concatenate([lp.lo, slo])
    hi = np.concatenate([lp.hi, shi])
    return d, vals, lo, hi, n


def dual_objective(lp, sol, tol=1e-9):
    """Lagrangian dual bound ``b.y + sum_j sup_{x_j in [lo,hi]} d_j x_j``."""
    d, _, lo, hi, _ = _full_reduced(lp, sol)
    if lp.sense == "min":
        d = -d
    terms = np.zeros_like(d)
    pos = d > tol
    neg = d < -tol
    terms[pos] = d[pos] * hi[pos]
    terms[neg] = d[neg] * lo[neg]
    small = ~(pos | neg)
    # tiny reduced costs on finite bounds still count toward the exact value
    fin_hi = small & (d > 0) & np.isfinite(hi)
    fin_lo = small & (d < 0) & np.isfinite(lo)
    terms[fin_hi] = d[fin_hi] * hi[fin_hi]
    terms[fin_lo] = d[fin_lo] * lo[fin_lo]
    val = float(lp.b @ sol.y) + (float(terms.sum()) if lp.sense == "max" else -float(terms.sum()))
    return val


def duality_gap(lp, sol):
    """``|c.x - dual objective|`` for an optimal solution."""
    if sol.status != OPTIMAL:
        raise StateError(f"duality gap is undefined for a {sol.status} solution")
    return abs(float(lp.c @ sol.x) - dual_objective(lp, sol))


def complementarity_residual(lp, sol, tol=1e-9):
    """Largest ``|d_j| * distance to the bound its sign selects``."""
    if sol.status != OPTIMAL:
        raise StateError(f"complementarity is undefined for a {sol.status} solution")
    d, vals, lo, hi, _ = _full_reduced(lp, sol)
    if lp.sense == "min":
        d = -d
    dist = np.where(d > 0, hi - vals, np.where(d < 0, vals - lo, 0.0))
    ad = np.abs(d)
    fin = np.isfinite(dist)
    r = np.zeros_like(ad)
    r[fin] = ad[fin] * np.abs(dist[fin])
    # an infinite distance only matters for a reduced cost above roundoff
    r[~fin & (ad > tol)] = np.inf
    return float(r.max(initial=0.0))


__all__ = [
    "EQ", "GE", "INFEASIBLE", "ITERATION_LIMIT", "LE", "LPSolution",
    "LinearProgram", "NumericalError", "OPTIMAL", "StateError",
    "StructureError", "UNBOUNDED", "build_engine", "complementarity_residual",
    "dual_objective", "duality_gap", "primal_residual", "row_activity",
    "solution_from_engine", "solve_lp",
]
