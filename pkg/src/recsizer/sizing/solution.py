"""Sizing results, dispatch extraction and JSON round trip."""

import json
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from ..core import FLOWS, DispatchSolution
from .. import tariff as tf
from .problem import BC, BD, CHARGE, DISCHARGE, SELF, SELL, SOC

SCHEMA_VERSION = 1
OPTIMAL = "Optimal"
NOT_PROVEN = "NotProven"
INFEASIBLE = "Infeasible"

_KIND = {"self": SELF, "sell": SELL, "charge": CHARGE, "discharge": DISCHARGE,
         "soc": SOC, "b_charge": BC, "b_discharge": BD}


@dataclass
class SolverStats:
    nodes: int = 0
    gap: float = float("nan")
    bound: float = float("nan")
    wall_time_s: float = 0.0
    lp_iterations: int = 0
    method: str = "bnb"


@dataclass(eq=False)
class SizingSolution:
    ids: list
    n_pv: list
    n_bess: list
    dispatch: DispatchSolution
    objective: float
    status: str = OPTIMAL
    stats: SolverStats = field(default_factory=SolverStats)
    x: np.ndarray = None
    config_hash: str = None

    def sizing(self):
        return {pid: (int(a), int(b)) for pid, a, b in zip(self.ids, self.n_pv, self.n_bess)}

    @property
    def sizing_vector(self):
        return tuple(self.n_pv) + tuple(self.n_bess)


def dispatch_from_x(problem, x):
    lay = problem.layout
    flows = {}
    gen = {}
    dem = {}
    for n, pid in enumerate(problem.ids):
        flows[pid] = {name: np.array(x[lay.flow(n, _KIND[name])]) for name in FLOWS}
        gen[pid] = problem.gen_per_panel[n] * x[lay.n_pv(n)]
        dem[pid] = problem.demand[n].copy()
    return DispatchSolution(problem.hours, flows, np.array(x[lay.shared()]), gen, dem,
                            problem.step_hours, problem.day_hours)


def make_solution(problem, x, status, stats):
    lay = problem.layout
    n_pv = [int(round(x[lay.n_pv(n)])) for n in range(problem.n_participants)]
    n_bess = [int(round(x[lay.n_bess(n)])) for n in range(problem.n_participants)]
    obj = float(problem.objective() @ x)
    return SizingSolution(list(problem.ids), n_pv, n_bess, dispatch_from_x(problem, x), obj,
                          status, stats, np.asarray(x, dtype=float))


def recompute_net_profit(problem, sol):
    """Community net profit rebuilt from the dispatch by the economics module."""
    comps, i_sh = tf.period_cashflow(sol.dispatch, problem.tariff, problem.step_hours)
    trajs = []
    for n, pid in enumerate(sol.ids):
        trajs.append(tf.npv_trajectory(comps[pid], sol.n_pv[n], sol.n_bess[n], problem.pv,
                                       problem.bess, problem.econ, problem.zeta[n], i_sh))
    return tf.net_profit(trajs), trajs, comps, i_sh


# ---------------------------------------------------------------------------
# JSON


def _arr(a):
    return [float(v) for v in np.asarray(a)]


def to_json_dict(sol, problem=None):
    d = sol.dispatch
    out = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": sol.config_hash,
        "status": sol.status,
        "objective_eur": sol.objective,
        "participants": [
            {"id": pid, "n_pv": sol.n_pv[k], "n_bess": sol.n_bess[k]} for k, pid in enumerate(sol.ids)
        ],
        "stats": {
            "method": sol.stats.method, "nodes": sol.stats.nodes, "gap": sol.stats.gap,
            "bound_eur": sol.stats.bound, "wall_time_s": sol.stats.wall_time_s,
            "lp_iterations": sol.stats.lp_iterations,
        },
        "dispatch": None if d is None else {
            "step_hours": d.step_hours,
            "day_hours": d.day_hours,
            "hours": [h.isoformat() for h in d.hours],
            "shared_kw": _arr(d.shared),
            "participants": {
                pid: {**{name: _arr(d.flows[pid][name]) for name in FLOWS},
                      "generation": _arr(d.generation[pid]) if d.generation else None,
                      "demand": _arr(d.demand[pid]) if d.demand else None}
                for pid in d.ids
            },
        },
    }
    if problem is not None:
        out["zeta"] = _arr(problem.zeta)
    return out


def dump_solution(path, sol, problem=None):
    with open(path, "w") as fh:
        json.dump(to_json_dict(sol, problem), fh, indent=1, allow_nan=True)


def from_json_dict(raw):
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported solution schema {raw.get('schema_version')!r}")
    dd = raw["dispatch"]
    flows, gen, dem = {}, {}, {}
    for pid, f in (dd or {}).get("participants", {}).items():
        flows[pid] = {name: np.array(f[name], dtype=float) for name in FLOWS}
        if f.get("generation") is not None:
            gen[pid] = np.array(f["generation"], dtype=float)
        if f.get("demand") is not None:
            dem[pid] = np.array(f["demand"], dtype=float)
    disp = None if dd is None else DispatchSolution(tuple(datetime.fromisoformat(h) for h in dd["hours"]), flows,
                            np.array(dd["shared_kw"], dtype=float), gen or None, dem or None,
                            dd.get("step_hours", 1.0), dd.get("day_hours", 24))
    st = raw.get("stats", {})
    stats = SolverStats(st.get("nodes", 0), st.get("gap", float("nan")), st.get("bound_eur", float("nan")),
                        st.get("wall_time_s", 0.0), st.get("lp_iterations", 0), st.get("method", "bnb"))
    parts = raw["participants"]
    return SizingSolution([p["id"] for p in parts], [int(p["n_pv"]) for p in parts],
                          [int(p["n_bess"]) for p in parts], disp, float(raw["objective_eur"]),
                          raw.get("status", OPTIMAL), stats, None, raw.get("config_hash"))


def load_solution(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))
