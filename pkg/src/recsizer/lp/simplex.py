"""Bounded-variable revised simplex.

Works on ``min f.x  s.t.  [A | I] (x, s) = b,  lo <= (x, s) <= hi`` where the
identity block holds one logical (slack) per row.  The basis inverse is kept
as an LU factorisation plus a product-form eta file and is refactorised every
``refactor_every`` pivots.  Infeasible starting points go through a composite
phase 1 that minimises the sum of bound violations of the basic variables, so
any basis (including a parent's basis after bound changes) is a valid start.
"""

import time

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .. import _kernels as K

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"


class NumericalError(RuntimeError):
    """Raised when the basis cannot be factorised reliably."""

    def __init__(self, msg, condition=None):
        super().__init__(msg if condition is None else f"{msg} (cond~{condition:.3e})")
        self.condition = condition


class _EtaFile:
    def __init__(self, m, cap):
        self.rows = np.zeros(cap, dtype=np.int64)
        self.piv = np.zeros(cap)
        self.starts = np.zeros(cap + 1, dtype=np.int64)
        self.idx = np.zeros(16 * m + 16, dtype=np.int64)
        self.vals = np.zeros(16 * m + 16)
        self.count = 0

    def clear(self):
        self.count = 0

    def push(self, r, alpha):
        k = self.count
        nz = np.flatnonzero(np.abs(alpha) > 1e-14)
        nz = nz[nz != r]
        s = self.starts[k]
        e = s + nz.size
        if e > self.idx.size:
            grow = max(e, 2 * self.idx.size)
            self.idx = np.resize(self.idx, grow)
            self.vals = np.resize(self.vals, grow)
        ar = alpha[r]
        self.rows[k] = r
        self.piv[k] = 1.0 / ar
        self.idx[s:e] = nz
        self.vals[s:e] = -alpha[nz] / ar
        self.starts[k + 1] = e
        self.count = k + 1

    def ftran(self, v):
        if self.count:
            K.ftran_etas(v, self.rows, self.piv, self.starts, self.idx, self.vals, self.count)
        return v

    def btran(self, v):
        if self.count:
            K.btran_etas(v, self.rows, self.piv, self.starts, self.idx, self.vals, self.count)
        return v


class Simplex:
    """One LP instance; bounds may be edited between calls to :meth:`solve`."""

    def __init__(self, A, b, cost, lo, hi, *, tol_feas=1e-9, tol_opt=1e-9,
                 tol_piv=1e-9, refactor_every=64, dense_below=400,
                 max_iter=None, bland_after=None, time_limit=None):
        A = sp.csc_matrix(A, dtype=np.float64)
        m, n = A.shape
        self.m, self.n = m, n
        self.N = n + m
        self.A = sp.hstack([A, sp.identity(m, format="csc")], format="csc")
        self.AT = self.A.T.tocsr()
        self.b = np.asarray(b, dtype=np.float64).copy()
        self.cost = np.zeros(self.N)
        self.cost[:n] = cost
        self.lo = np.asarray(lo, dtype=np.float64).copy()
        self.hi = np.asarray(hi, dtype=np.float64).copy()
        assert self.lo.shape == (self.N,) and self.hi.shape == (self.N,)
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        self.tol_piv = tol_piv
        self.refactor_every = refactor_every
        self.dense = m <= dense_below
        self.max_iter = max_iter if max_iter is not None else 50 * (m + self.N) + 1000
        self.bland_after = bland_after if bland_after is not None else 5 * (m + n)
        self.time_limit = time_limit
        self.etas = _EtaFile(m, refactor_every + 1)
        self.basis = None
        self.vstat = None
        self.x = None
        self.iterations = 0
        self.status = None

    # -- factorisation ------------------------------------------------------

    def _factor(self):
        B = self.A[:, self.basis]
        try:
            if self.dense:
                Bd = B.toarray()
                lu = sla.lu_factor(Bd, check_finite=False)
                if np.min(np.abs(np.diag(lu[0]))) < 1e-13 * max(1.0, np.abs(Bd).max()):
                    raise NumericalError("singular basis", np.linalg.cond(Bd))
                self._lu = lu
            else:
                self._lu = spla.splu(B.tocsc(), permc_spec="COLAMD")
        except RuntimeError as exc:
            if isinstance(exc, NumericalError):
                raise
            raise NumericalError(f"basis factorisation failed: {exc}") from exc
        self.etas.clear()

    def _lu_solve(self, v, trans=False):
        if self.dense:
            return sla.lu_solve(self._lu, v, trans=1 if trans else 0, check_finite=False)
        return self._lu.solve(v, trans="T" if trans else "N")

    def ftran(self, v):
        return self.etas.ftran(self._lu_solve(v))

    def btran(self, v):
        return self._lu_solve(self.etas.btran(v.copy()), trans=True)

    # -- state --------------------------------------------------------------

    def _reset_nonbasic(self):
        """Re-seat nonbasic variables on their (possibly edited) bounds."""
        lo, hi, vs = self.lo, self.hi, self.vstat
        nb = vs != K.BASIC
        fixed = nb & (lo == hi)
        vs[fixed] = K.FIXED
        rest = nb & ~fixed
        lo_f = np.isfinite(lo)
        hi_f = np.isfinite(hi)
        want_up = rest & (vs == K.AT_UPPER) & hi_f
        vs[rest] = K.FREE
        vs[rest & lo_f] = K.AT_LOWER
        vs[rest & ~lo_f & hi_f] = K.AT_UPPER
        vs[want_up] = K.AT_UPPER
        x = np.zeros(self.N)
        x[vs == K.AT_LOWER] = lo[vs == K.AT_LOWER]
        x[vs == K.FIXED] = lo[vs == K.FIXED]
        x[vs == K.AT_UPPER] = hi[vs == K.AT_UPPER]
        self.x = x

    def _recompute_basics(self):
        x = self.x
        x[self.basis] = 0.0
        rhs = self.b - self.A @ x
        x[self.basis] = self.ftran(rhs)

    def set_start(self, basis=None, vstat=None):
        m, n = self.m, self.n
        if basis is None:
            self.basis = np.arange(n, n + m, dtype=np.int64)
            self.vstat = np.full(self.N, K.AT_LOWER, dtype=np.int8)
            self.vstat[self.basis] = K.BASIC
        else:
            self.basis = np.asarray(basis, dtype=np.int64).copy()
            self.vstat = np.asarray(vstat, dtype=np.int8).copy()
        self._reset_nonbasic()
        self._factor()
        self._recompute_basics()

    # -- main loop ----------------------------------------------------------

    def _column(self, q):
        A = self.A
        s, e = A.indptr[q], A.indptr[q + 1]
        col = np.zeros(self.m)
        col[A.indices[s:e]] = A.data[s:e]
        return col

    def solve(self, basis=None, vstat=None):
        if basis is not None or self.basis is None:
            self.set_start(basis, vstat)
        else:
            self._reset_nonbasic()
            self._factor()
            self._recompute_basics()
        t0 = time.perf_counter()
        it = 0
        best_obj = np.inf
        last_phase = None
        stall = 0
        bland = False
        fresh = True
        retries = 0
        tf = self.tol_feas
        self.status = None
        while True:
            if it >= self.max_iter or (
                self.time_limit is not None and time.perf_counter() - t0 > self.time_limit
            ):
                self.status = ITERATION_LIMIT
                break
            basis = self.basis
            x = self.x
            xb = x[basis]
            lob = self.lo[basis]
            hib = self.hi[basis]
            below = xb < lob - tf
            above = xb > hib + tf
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.zeros(self.m)
                cb[below] = -1.0
                cb[above] = 1.0
                y = self.btran(cb)
                d = -(self.AT @ y)
                obj = float(np.sum(lob[below] - xb[below]) + np.sum(xb[above] - hib[above]))
            else:
                y = self.btran(self.cost[basis])
                d = self.cost - self.AT @ y
                obj = float(self.cost @ x)
            d[basis] = 0.0
            if phase1 != last_phase:
                last_phase = phase1
                best_obj = np.inf
            if obj < best_obj - 1e-12 * max(1.0, abs(obj)):
                best_obj = obj
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > self.bland_after:
                    bland = True
            q = K.price(d, self.vstat, self.tol_opt, bland)
            if q < 0:
                if not fresh:
                    # confirm against a clean factorisation before stopping
                    self._factor()
                    self._recompute_basics()
                    fresh = True
                    continue
                self.status = INFEASIBLE if phase1 else OPTIMAL
                break
            sigma = 1.0 if d[q] < 0 else -1.0
            alpha = self.ftran(self._column(q))
            delta = -sigma * alpha
            r, theta, to_upper = K.ratio_test(
                delta, np.ascontiguousarray(xb), lob, hib, phase1,
                self.tol_piv, tf, tf,
            )
            span = self.hi[q] - self.lo[q]
            if np.isfinite(span) and (r < 0 or span <= theta):
                # bound flip, basis unchanged
                self.vstat[q] = K.AT_UPPER if sigma > 0 else K.AT_LOWER
                x[q] = self.hi[q] if sigma > 0 else self.lo[q]
                x[basis] = xb + span * delta
                fresh = False
                it += 1
                continue
            if r < 0:
                if phase1 and retries < 3:
                    retries += 1
                    self._factor()
                    self._recompute_basics()
                    fresh = True
                    it += 1
                    continue
                self.status = INFEASIBLE if phase1 else UNBOUNDED
                self.ray_col = q
                break
            x[q] = x[q] + sigma * theta
            x[basis] = xb + theta * delta
            leave = basis[r]
            if self.lo[leave] == self.hi[leave]:
                self.vstat[leave] = K.FIXED
                x[leave] = self.lo[leave]
            elif to_upper:
                self.vstat[leave] = K.AT_UPPER
                x[leave] = self.hi[leave]
            else:
                self.vstat[leave] = K.AT_LOWER
                x[leave] = self.lo[leave]
            basis[r] = q
            self.vstat[q] = K.BASIC
            if self.etas.count >= self.refactor_every:
                self._factor()
                self._recompute_basics()
            else:
                self.etas.push(r, alpha)
            fresh = False
            it += 1
        self.iterations = it
        if self.status == OPTIMAL:
            self.y = self.btran(self.cost[self.basis])
            self.d = self.cost - self.AT @ self.y
            self.d[self.basis] = 0.0
        return self.status
