"""Exhaustive reference solver for toy instances.

Every integer sizing tuple is tried.  For each one, the dispatch LP is
written out again from the model equations, with the sizing plugged in as
numbers, so this path shares only the simplex with the production assembly.
Every hour gets a charge-or-discharge choice, and the best choice is found
by exhaustive enumeration.  Two exact shortcuts keep this tractable:

* an hour where a participant has no PV or no battery cannot charge, so only
  the discharge side of the choice is enumerated there;
* if the LP with both sides allowed already avoids simultaneous charge and
  discharge, it is optimal for that sizing and enumeration is skipped;
  likewise a sizing whose unrestricted LP cannot beat the best value found
  so far cannot contain the optimum.
"""

import itertools
import math
import time

import numpy as np
import scipy.sparse as sp

from ..lp import EQ, GE, LE, LinearProgram, OPTIMAL, solve_lp
from .problem import BC, BD, CHARGE, DISCHARGE, SELF, SELL, SOC
from .solution import INFEASIBLE, OPTIMAL as SOL_OPTIMAL, SolverStats, make_solution

MAX_PARTICIPANTS = 2
MAX_HOURS = 8
MAX_PANELS = 3
MAX_UNITS = 1


class OracleLimitExceeded(ValueError):
    pass


def _check_limits(p):
    if p.n_participants > MAX_PARTICIPANTS:
        raise OracleLimitExceeded(f"{p.n_participants} participants > {MAX_PARTICIPANTS}")
    if p.n_hours > MAX_HOURS:
        raise OracleLimitExceeded(f"{p.n_hours} hours > {MAX_HOURS}")
    if int(np.max(p.np_max)) > MAX_PANELS:
        raise OracleLimitExceeded(f"panel bound {int(np.max(p.np_max))} > {MAX_PANELS}")
    if p.nb_max > MAX_UNITS:
        raise OracleLimitExceeded(f"battery bound {p.nb_max} > {MAX_UNITS}")


class _DispatchLP:
    """Dispatch LP for fixed sizing; columns ``[self, sell, c, d, S] x N`` then shared."""

    def __init__(self, p):
        self.p = p
        N, T = p.n_participants, p.n_hours
        self.N, self.T = N, T
        self.nv = 5 * N * T + T
        W = p.flow_weight()
        dt = p.step_hours
        c = np.zeros(self.nv)
        for n in range(N):
            c[self._i(n, 0, 0):self._i(n, 0, 0) + T] = p.buy * dt * W
            c[self._i(n, 1, 0):self._i(n, 1, 0) + T] = p.sell * dt * W
        c[5 * N * T:] = p.tariff.incentive_eur_per_kwh * dt * W
        self.c = c
        pv_cost, bess_cost = p.unit_values()
        self.pv_cost, self.bess_cost = pv_cost, bess_cost

    def _i(self, n, k, t):
        return (n * 5 + k) * self.T + t

    def build(self, n_pv, n_bess, closed):
        """LP for the given sizing; ``closed[n][t]`` is 'c' or 'd' for the side shut off."""
        p, N, T = self.p, self.N, self.T
        bs = p.bess
        dt = p.step_hours
        A = []
        senses = []
        rhs = []
        lo = np.zeros(self.nv)
        hi = np.full(self.nv, np.inf)

        def add(coefs, s, r):
            row = np.zeros(self.nv)
            for j, v in coefs:
                row[j] += v
            A.append(row)
            senses.append(s)
            rhs.append(r)

        for n in range(N):
            gen = p.gen_per_panel[n] * n_pv[n]
            for t in range(T):
                s_, e_, c_, d_, S_ = (self._i(n, k, t) for k in range(5))
                # generation splits into self-use and sales
                add([(s_, 1), (e_, 1)], EQ, gen[t])
                add([(s_, 1)], LE, gen[t])
                add([(s_, 1), (c_, -1), (d_, 1)], LE, p.demand[n, t])
                hi[c_] = min(gen[t], n_bess[n] * bs.p_charge_max_kw)
                hi[d_] = n_bess[n] * bs.p_discharge_max_kw
                if closed is not None and closed[n][t] == "c":
                    hi[c_] = 0.0
                if closed is not None and closed[n][t] == "d":
                    hi[d_] = 0.0
                lo[S_] = n_bess[n] * bs.soc_min_kwh
                hi[S_] = n_bess[n] * bs.soc_max_kwh
                day = t // p.day_hours
                prev = t - 1 if t % p.day_hours else (day + 1) * p.day_hours - 1
                add([(S_, 1), (self._i(n, 4, prev), -1), (c_, -bs.eta_c * dt), (d_, dt / bs.eta_d)], EQ, 0.0)
        for t in range(T):
            sh = 5 * N * T + t
            coefs = [(sh, 1)]
            for n in range(N):
                coefs += [(self._i(n, 0, t), 1), (self._i(n, 2, t), -1), (self._i(n, 3, t), 1)]
            add(coefs, LE, float(p.demand[:, t].sum()))
            add([(sh, 1)] + [(self._i(n, 1, t), -1) for n in range(N)], LE, 0.0)
        return LinearProgram(self.c, np.array(A), tuple(senses), np.array(rhs), lo, hi, "max")

    def value(self, sol, n_pv, n_bess):
        return sol.objective - self.pv_cost * sum(n_pv) - self.bess_cost * sum(n_bess)

    def simultaneous(self, x, tol=1e-10):
        N, T = self.N, self.T
        for n in range(N):
            c = x[self._i(n, 2, 0):self._i(n, 2, 0) + T]
            d = x[self._i(n, 3, 0):self._i(n, 3, 0) + T]
            if np.any(c * d > tol):
                return True
        return False

    def to_full(self, x, n_pv, n_bess):
        p = self.p
        lay = p.layout
        out = np.zeros(lay.n_vars)
        for n in range(self.N):
            out[lay.n_pv(n)] = n_pv[n]
            out[lay.n_bess(n)] = n_bess[n]
            for k, kk in ((0, SELF), (1, SELL), (2, CHARGE), (3, DISCHARGE), (4, SOC)):
                out[lay.flow(n, kk)] = x[self._i(n, k, 0):self._i(n, k, 0) + self.T]
            c = out[lay.flow(n, CHARGE)]
            d = out[lay.flow(n, DISCHARGE)]
            out[lay.flow(n, BC)] = (c > 0).astype(float)
            out[lay.flow(n, BD)] = ((d > 0) & ~(c > 0)).astype(float)
        out[lay.shared()] = x[5 * self.N * self.T:]
        return out


def brute_force_oracle(problem):
    """Best sizing and dispatch by enumeration; see the module notes."""
    _check_limits(problem)
    t0 = time.perf_counter()
    p = problem
    dlp = _DispatchLP(p)
    N, T = p.n_participants, p.n_hours
    ranges = [range(int(p.np_max[n]) + 1) for n in range(N)] + [range(p.nb_max + 1)] * N
    best = None  # (value, key, full x)
    lps = 0
    for combo in itertools.product(*ranges):
        n_pv, n_bess = combo[:N], combo[N:]
        sol = solve_lp(dlp.build(n_pv, n_bess, None))
        lps += 1
        if sol.status != OPTIMAL:
            continue
        ub = dlp.value(sol, n_pv, n_bess)
        key = tuple(combo)
        if best is not None and ub < best[0] - 1e-9 * max(1.0, abs(best[0])):
            continue
        if not dlp.simultaneous(sol.x):
            cand = (ub, key, dlp.to_full(sol.x, n_pv, n_bess))
        else:
            free = [(n, t) for n in range(N) for t in range(T)
                    if n_bess[n] > 0 and n_pv[n] > 0 and p.gen_per_panel[n, t] > 0]
            cand = None
            for pattern in itertools.product("cd", repeat=len(free)):
                closed = [["c"] * T for _ in range(N)]
                for (n, t), side in zip(free, pattern):
                    closed[n][t] = side
                s2 = solve_lp(dlp.build(n_pv, n_bess, closed))
                lps += 1
                if s2.status != OPTIMAL:
                    continue
                v = dlp.value(s2, n_pv, n_bess)
                if cand is None or v > cand[0]:
                    cand = (v, key, dlp.to_full(s2.x, n_pv, n_bess))
            if cand is None:
                continue
        if best is None:
            best = cand
        else:
            tie = 1e-9 * max(1.0, abs(best[0]))
            if cand[0] > best[0] + tie or (abs(cand[0] - best[0]) <= tie and cand[1] < best[1]):
                best = cand
    wall = time.perf_counter() - t0
    if best is None:
        return make_solution_empty(p, SolverStats(0, math.inf, -math.inf, wall, lps, "oracle"))
    stats = SolverStats(lps, 0.0, best[0], wall, lps, "oracle")
    return make_solution(p, best[2], SOL_OPTIMAL, stats)


def make_solution_empty(p, stats):
    from .solution import SizingSolution
    N = p.n_participants
    return SizingSolution(list(p.ids), [0] * N, [0] * N, None, float("nan"), INFEASIBLE, stats)
