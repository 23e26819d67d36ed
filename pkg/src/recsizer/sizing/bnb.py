"""Best-bound branch and bound over the simplex core.

Sizing integers are branched first (most fractional).  Charge/discharge
binaries are only branched when the relaxation actually charges and
discharges in the same hour; otherwise they can be set from the flows
without changing the objective.  Nodes are popped in fixed-size batches and
processed in pop order, so the search is identical for any thread count.
"""

import heapq
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..lp import INFEASIBLE as LP_INFEASIBLE
from ..lp import OPTIMAL as LP_OPTIMAL
from ..lp import LE, LinearProgram, build_engine
from .problem import BC, BD, CHARGE, DISCHARGE
from .solution import INFEASIBLE, NOT_PROVEN, OPTIMAL, SolverStats, make_solution

log = logging.getLogger(__name__)

INT_TOL = 1e-6
COMP_TOL = 1e-10
BATCH = 4


def with_envelope_cuts(problem):
    """The sizing LP plus ``c/Pc + d/Pd <= N_bess`` for every hour.

    At most one of charge and discharge is active in an integer point and
    each is capped by ``N_bess`` times its rating, so these rows cut off
    only fractional points.  They remove most of the relaxation's gain from
    charging and discharging in the same hour.
    """
    lp = problem.lp()
    lay = problem.layout
    bs = problem.bess
    rows, cols, vals = [], [], []
    k = 0
    for n in range(problem.n_participants):
        for t in range(problem.n_hours):
            rows += [k, k, k]
            cols += [lay.flow(n, CHARGE, t), lay.flow(n, DISCHARGE, t), lay.n_bess(n)]
            vals += [1.0 / bs.p_charge_max_kw, 1.0 / bs.p_discharge_max_kw, -1.0]
            k += 1
    cut = sp.csr_matrix((vals, (rows, cols)), shape=(k, lp.c.size))
    return LinearProgram(lp.c, sp.vstack([lp.A, cut], format="csr"), lp.senses + (LE,) * k,
                         np.concatenate([lp.b, np.zeros(k)]), lp.lo, lp.hi, lp.sense)


@dataclass(order=True)
class _Node:
    key: tuple
    fix: dict = field(compare=False)
    state: tuple = field(compare=False, default=None)
    depth: int = field(compare=False, default=0)


def _rel_gap(bound, inc):
    if inc is None:
        return math.inf
    return max(0.0, bound - inc) / max(1.0, abs(inc))


class _Search:
    def __init__(self, problem, gap_tol, time_limit, node_limit, threads, lp_opts):
        self.p = problem
        self.lp = with_envelope_cuts(problem)
        self.lay = problem.layout
        self.n = self.lp.c.size
        self.gap_tol = gap_tol
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.threads = max(1, int(threads))
        self.engines = [build_engine(self.lp, **lp_opts) for _ in range(BATCH)]
        self.base_lo = self.engines[0].lo.copy()
        self.base_hi = self.engines[0].hi.copy()
        self.sizing = np.array(self.lay.sizing_indices())
        N, T = problem.n_participants, problem.n_hours
        self.c_idx = np.array([[self.lay.flow(k, CHARGE, t) for t in range(T)] for k in range(N)])
        self.d_idx = np.array([[self.lay.flow(k, DISCHARGE, t) for t in range(T)] for k in range(N)])
        self.bc_idx = np.array([[self.lay.flow(k, BC, t) for t in range(T)] for k in range(N)])
        self.bd_idx = np.array([[self.lay.flow(k, BD, t) for t in range(T)] for k in range(N)])
        self.inc_x = None
        self.inc_obj = None
        self.inc_key = None
        self.iters = 0
        self.t0 = time.perf_counter()

    # -- LP evaluation ------------------------------------------------------

    def _solve(self, slot, fix, state):
        eng = self.engines[slot]
        eng.lo[:] = self.base_lo
        eng.hi[:] = self.base_hi
        for j, (lo, hi) in fix.items():
            eng.lo[j] = lo
            eng.hi[j] = hi
        if self.time_limit is not None:
            eng.time_limit = max(1.0, self.time_limit - (time.perf_counter() - self.t0))
        if state is None:
            eng.set_start(None, None)
            status = eng.solve()
        else:
            status = eng.solve(state[0], state[1])
        x = eng.x[: self.n].copy() if status == LP_OPTIMAL else None
        obj = float(self.lp.c @ x) if x is not None else None
        return status, x, obj, (eng.basis.copy(), eng.vstat.copy()), eng.iterations

    # -- incumbents ---------------------------------------------------------

    def _offer(self, x):
        obj = float(self.lp.c @ x)
        key = tuple(int(round(v)) for v in self._sizing_vector(x))
        if self.inc_obj is None:
            better = True
        else:
            tie = 1e-9 * max(1.0, abs(self.inc_obj))
            better = obj > self.inc_obj + tie or (abs(obj - self.inc_obj) <= tie and key < self.inc_key)
        if better:
            self.inc_x, self.inc_obj, self.inc_key = x, obj, key
        return better

    def _sizing_vector(self, x):
        lay, N = self.lay, self.p.n_participants
        return [x[lay.n_pv(k)] for k in range(N)] + [x[lay.n_bess(k)] for k in range(N)]

    def _finalise_binaries(self, x):
        x = x.copy()
        c = x[self.c_idx]
        d = x[self.d_idx]
        x[self.bc_idx] = (c > 0).astype(float)
        x[self.bd_idx] = ((d > 0) & ~(c > 0)).astype(float)
        # a flow smaller than roundoff on a switched-off side is dropped
        x[self.d_idx] = np.where((c > 0) & (d > 0), 0.0, d)
        return x

    def _polish(self, slot, x, fix, state, rounder=round):
        """Fix the sizing to the rounded values and pin one side per hour."""
        f = dict(fix)
        for j in self.sizing:
            v = float(min(max(rounder(x[j] + 1e-9 if rounder is math.floor else x[j]), self.base_lo[j]), self.base_hi[j]))
            lo, hi = fix.get(j, (self.base_lo[j], self.base_hi[j]))
            v = min(max(v, lo), hi)
            f[j] = (v, v)
        c = x[self.c_idx]
        d = x[self.d_idx]
        side_c = c > d
        for k in range(c.shape[0]):
            for t in range(c.shape[1]):
                if c[k, t] > COMP_TOL or d[k, t] > COMP_TOL:
                    j = self.bd_idx[k, t] if side_c[k, t] else self.bc_idx[k, t]
                    if j not in fix:
                        f[j] = (0.0, 0.0)
        status, xp, _, _, it = self._solve(slot, f, state)
        self.iters += it
        if status != LP_OPTIMAL:
            return None
        if np.any(xp[self.c_idx] * xp[self.d_idx] > COMP_TOL):
            return None
        for j in self.sizing:
            xp[j] = round(xp[j])
        return self._finalise_binaries(xp)

    # -- branching ----------------------------------------------------------

    def _branch_var(self, x):
        frac = np.abs(x[self.sizing] - np.round(x[self.sizing]))
        if frac.max(initial=0.0) > INT_TOL:
            score = np.abs(x[self.sizing] - np.floor(x[self.sizing]) - 0.5)
            k = int(np.argmin(np.where(frac > INT_TOL, score, np.inf)))
            j = int(self.sizing[k])
            v = x[j]
            return [(j, (self.base_lo[j], math.floor(v))), (j, (math.ceil(v), self.base_hi[j]))]
        prod = x[self.c_idx] * x[self.d_idx]
        if prod.max(initial=0.0) > COMP_TOL:
            k, t = np.unravel_index(int(np.argmax(prod)), prod.shape)
            return [(int(self.bd_idx[k, t]), (0.0, 0.0)), (int(self.bc_idx[k, t]), (0.0, 0.0))]
        return None

    # -- pruning ------------------------------------------------------------

    def _tie(self):
        return 1e-9 * max(1.0, abs(self.inc_obj))

    def _prunable(self, bound):
        # with a zero gap target, nodes tying the incumbent stay open so the
        # lexicographic tie-break sees every optimal sizing
        if self.inc_obj is None:
            return False
        if self.gap_tol > 0:
            return bound <= self.inc_obj + max(self._tie(), self.gap_tol * max(1.0, abs(self.inc_obj)))
        return bound < self.inc_obj - self._tie()

    def _done(self, bound):
        if self.gap_tol > 0:
            return _rel_gap(bound, self.inc_obj) <= self.gap_tol
        return bound < self.inc_obj - self._tie()

    # -- main loop ----------------------------------------------------------

    def _out_of_budget(self, nodes):
        if self.node_limit is not None and nodes >= self.node_limit:
            return True
        return self.time_limit is not None and time.perf_counter() - self.t0 > self.time_limit

    def run(self):
        heap = []
        seq = 0
        heapq.heappush(heap, _Node((-math.inf, seq), {}, None, 0))
        nodes = 0
        bound = math.inf
        limited = False
        pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        try:
            while heap:
                bound = -heap[0].key[0]
                if self.inc_obj is not None:
                    if self._done(bound):
                        break
                if self._out_of_budget(nodes):
                    limited = True
                    break
                batch = []
                while heap and len(batch) < BATCH:
                    nd = heapq.heappop(heap)
                    if self._prunable(-nd.key[0]):
                        continue
                    batch.append(nd)
                if not batch:
                    continue
                jobs = [(slot, nd.fix, nd.state) for slot, nd in enumerate(batch)]
                if pool is None:
                    results = [self._solve(*j) for j in jobs]
                else:
                    results = list(pool.map(lambda a: self._solve(*a), jobs))
                for slot, (nd, (status, x, obj, state, it)) in enumerate(zip(batch, results)):
                    nodes += 1
                    self.iters += it
                    if status == LP_INFEASIBLE:
                        continue
                    if status != LP_OPTIMAL:
                        # an unfinished LP still bounds nothing; keep the node's parent bound
                        limited = True
                        heapq.heappush(heap, nd)
                        continue
                    if self._prunable(obj):
                        continue
                    br = self._branch_var(x)
                    if br is None:
                        xp = self._polish(slot, x, nd.fix, state)
                        if xp is not None:
                            self._offer(xp)
                            continue
                        # polishing failed; fall back to splitting on the busiest hour
                        br = self._forced_split(x, nd.fix)
                        if br is None:
                            continue
                    elif nd.depth == 0 or nodes % 16 == 0:
                        for rounder in ((round, math.floor) if nd.depth == 0 else (round,)):
                            xp = self._polish(slot, x, nd.fix, state, rounder)
                            if xp is not None:
                                self._offer(xp)
                    for j, (lo, hi) in br:
                        if lo > hi:
                            continue
                        f = dict(nd.fix)
                        f[j] = (lo, hi)
                        seq += 1
                        heapq.heappush(heap, _Node((-obj, seq), f, state, nd.depth + 1))
                open_bound = -heap[0].key[0] if heap else (self.inc_obj if self.inc_obj is not None else -math.inf)
                log.info("node=%d bound=%.6f incumbent=%s gap=%s", nodes, open_bound,
                         "nan" if self.inc_obj is None else f"{self.inc_obj:.6f}",
                         f"{_rel_gap(open_bound, self.inc_obj):.3e}")
                if limited:
                    break
        finally:
            if pool is not None:
                pool.shutdown()
        if heap:
            bound = max(-heap[0].key[0], self.inc_obj if self.inc_obj is not None else -math.inf)
        else:
            bound = self.inc_obj if self.inc_obj is not None else -math.inf
            limited = False
        return nodes, bound, limited

    def _forced_split(self, x, fix):
        c = x[self.c_idx]
        d = x[self.d_idx]
        act = np.maximum(c, d)
        for k, t in zip(*np.unravel_index(np.argsort(-act, axis=None, kind="stable"), act.shape)):
            if act[k, t] <= COMP_TOL:
                break
            jc, jd = int(self.bc_idx[k, t]), int(self.bd_idx[k, t])
            if jc not in fix and jd not in fix:
                return [(jd, (0.0, 0.0)), (jc, (0.0, 0.0))]
        return None


def solve_bnb(problem, gap_tol=1e-6, time_limit=None, node_limit=None, threads=1, **lp_opts):
    """Solve the sizing problem; returns a :class:`SizingSolution`.

    ``status`` is ``Optimal`` when the relative gap is proven below
    ``gap_tol``, ``NotProven`` when a limit stopped the search first, and
    ``Infeasible`` when no integer point exists.
    """
    t0 = time.perf_counter()
    s = _Search(problem, gap_tol, time_limit, node_limit, threads, lp_opts)
    nodes, bound, limited = s.run()
    wall = time.perf_counter() - t0
    if s.inc_x is None:
        status = NOT_PROVEN if limited else INFEASIBLE
        stats = SolverStats(nodes, math.inf, bound, wall, s.iters)
        return _empty(problem, status, stats)
    gap = _rel_gap(bound, s.inc_obj)
    status = OPTIMAL if gap <= gap_tol else NOT_PROVEN
    stats = SolverStats(nodes, gap, max(bound, s.inc_obj), wall, s.iters)
    log.info("node=%d bound=%.6f incumbent=%.6f gap=%.3e", nodes, stats.bound, s.inc_obj, gap)
    return make_solution(problem, s.inc_x, status, stats)


def _empty(problem, status, stats):
    from .solution import SizingSolution
    N = problem.n_participants
    return SizingSolution(list(problem.ids), [0] * N, [0] * N, None, float("nan"), status, stats)
