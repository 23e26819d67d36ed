"""Solver-independent feasibility check of a sizing solution."""

from dataclasses import dataclass

import numpy as np

from .. import bess as bm

TOL = 1e-6
PERIODIC_TOL = 1e-9


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str
    participant: str
    hour: int
    residual: float


def _v(out, name, pid, t, r, tol=TOL):
    if r > tol:
        out.append(ConstraintViolation(name, pid, t, float(r)))


def check_solution(problem, sol, tol=TOL):
    """Return every violated constraint; an empty list means feasible.

    Works from the sizing counts and the dispatch only, not from the
    solver's column vector.
    """
    out = []
    d = sol.dispatch
    if d is None:
        return [ConstraintViolation("missing_dispatch", "", -1, float("inf"))]
    p = problem
    T, D = p.n_hours, p.day_hours
    bs = p.bess
    net_sum = np.zeros(T)
    sell_sum = np.zeros(T)
    for n, pid in enumerate(p.ids):
        f = d.flows[pid]
        npv, nb = sol.n_pv[n], sol.n_bess[n]
        if npv != int(npv) or nb != int(nb):
            _v(out, "integrality", pid, -1, 1.0, 0.0)
        _v(out, "roof_panels", pid, -1, npv - p.np_max[n], 0.0)
        _v(out, "battery_units", pid, -1, nb - bs.max_units, 0.0)
        _v(out, "sizing_nonneg", pid, -1, -min(npv, nb), 0.0)
        gen = p.gen_per_panel[n] * npv
        dem = p.demand[n]
        s, e, c, dd, soc = f["self"], f["sell"], f["charge"], f["discharge"], f["soc"]
        bc, bd = f["b_charge"], f["b_discharge"]
        for t in range(T):
            for name, val in (("self", s[t]), ("sell", e[t]), ("charge", c[t]), ("discharge", dd[t]), ("soc", soc[t])):
                _v(out, f"{name}_nonneg", pid, t, -val, tol)
            _v(out, "sell_balance", pid, t, abs(e[t] - (gen[t] - s[t])), tol)
            _v(out, "self_le_pv", pid, t, s[t] - gen[t], tol)
            _v(out, "self_le_demand", pid, t, s[t] - (dem[t] + c[t] - dd[t]), tol)
            _v(out, "charge_le_pv", pid, t, c[t] - gen[t], tol)
            for name, b in (("bc", bc[t]), ("bd", bd[t])):
                _v(out, f"binary_{name}", pid, t, min(abs(b), abs(b - 1.0)), tol)
            _v(out, "charge_switch", pid, t, c[t] - p.big_m_charge * bc[t], tol)
            _v(out, "discharge_switch", pid, t, dd[t] - p.big_m_discharge * bd[t], tol)
            _v(out, "one_direction", pid, t, bc[t] + bd[t] - 1.0, tol)
        for r in bm.validate_dispatch(soc, c, dd, nb, bs, p.step_hours, tol=tol, periodic_days=D):
            # the recursion step into a day's first hour is the wrap-around link
            name = "periodicity" if r.constraint == "soc_recursion" and r.step % D == 0 else r.constraint
            out.append(ConstraintViolation(name, pid, r.step, r.residual))
        # periodicity: a day's net stored energy must be zero
        for v in range(T // D):
            sl = slice(v * D, (v + 1) * D)
            net = float(np.sum(bs.eta_c * c[sl] - dd[sl] / bs.eta_d) * p.step_hours)
            _v(out, "periodicity", pid, v, abs(net), PERIODIC_TOL * max(1.0, float(np.max(soc[sl], initial=0.0))))
        net_sum += dem + c - dd - s
        sell_sum += e
    for t in range(T):
        _v(out, "shared_nonneg", "", t, -d.shared[t], tol)
        _v(out, "shared_le_net_demand", "", t, d.shared[t] - net_sum[t], tol)
        _v(out, "shared_le_sell", "", t, d.shared[t] - sell_sum[t], tol)
    return out


def periodicity_residuals(problem, sol):
    """Per participant, |S at the end of each day - S at its start|."""
    out = {}
    D = problem.day_hours
    bs = problem.bess
    for pid in problem.ids:
        f = sol.dispatch.flows[pid]
        res = []
        for v in range(problem.n_hours // D):
            sl = slice(v * D, (v + 1) * D)
            start = f["soc"][v * D] - (bs.eta_c * f["charge"][v * D] - f["discharge"][v * D] / bs.eta_d) * problem.step_hours
            res.append(abs(f["soc"][(v + 1) * D - 1] - start))
        out[pid] = res
    return out
