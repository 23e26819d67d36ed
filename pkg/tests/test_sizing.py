import json
from dataclasses import replace

import numpy as np
import pytest

from recsizer.core import BESSSpec, EconomicParams, PVSpec, TariffSchedule
from recsizer.sizing import (NOT_PROVEN, OPTIMAL, Layout, OracleLimitExceeded, SizingProblem,
                             assemble, brute_force_oracle, check_solution, dump_solution,
                             load_solution, periodicity_residuals, recompute_net_profit, solve_bnb,
                             synthetic_hours)
from recsizer.sizing.problem import BC, BD, CHARGE
from recsizer.lp import StructureError
from recsizer.synthetic import tiny_problem


def _single(demand, gen, np_max=3, pv=None, bess=None, tariff=None, econ=None):
    demand = np.atleast_2d(demand)
    T = demand.shape[1]
    return SizingProblem(["a"], synthetic_hours(T), demand, np.atleast_2d(gen), [np_max],
                         pv or PVSpec(), bess or replace(BESSSpec(), max_units=1),
                         econ or EconomicParams(), tariff or TariffSchedule(), [1.0], day_hours=T)


# -- layout --------------------------------------------------------------------


def test_layout_matches_counting():
    lay = Layout(1, 96)
    seen = [lay.n_pv(0), lay.n_bess(0)]
    for k in range(7):
        seen.extend(range(lay.flow(0, k).start, lay.flow(0, k).stop))
    seen.extend(range(lay.shared().start, lay.shared().stop))
    assert sorted(seen) == list(range(len(seen)))
    # two sizing integers, seven hourly blocks and the shared block
    assert lay.n_vars == len(seen) == 2 + 7 * 96 + 96


def test_layout_two_participants_disjoint():
    lay = Layout(2, 8)
    idx = set()
    for n in range(2):
        idx |= {lay.n_pv(n), lay.n_bess(n)}
        for k in range(7):
            idx |= {lay.flow(n, k, t) for t in range(8)}
    idx |= {lay.shared(t) for t in range(8)}
    assert len(idx) == lay.n_vars == 2 * (2 + 56) + 8
    assert len(lay.binary_indices()) == 2 * 2 * 8


def test_big_m_uses_unit_bound():
    p = _single(np.ones(24), np.full(24, 0.2), bess=replace(BESSSpec(), max_units=2))
    assert p.big_m_charge == pytest.approx(2.5)
    A, senses, b, labels = p.constraints()
    A = A.tocsr()
    lay = p.layout
    rows = [i for i, lab in enumerate(labels) if lab == "charge_switch"]
    assert len(rows) == 24
    for i in rows[:3]:
        r = A.getrow(i)
        coef = dict(zip(r.indices, r.data))
        bcol = [j for j in coef if lay.flow(0, BC).start <= j < lay.flow(0, BC).stop]
        assert coef[bcol[0]] == pytest.approx(-2.5)


def test_zero_roof_bound(desk_problem):
    i = desk_problem.ids.index("p2")
    lo, hi = desk_problem.bounds()
    assert hi[desk_problem.layout.n_pv(i)] == 0


def test_flow_coefficients():
    p = _single(np.ones(24), np.full(24, 0.2))
    c = p.objective()
    e = p.econ
    A = sum((1 + e.discount_rate_per_year) ** -y for y in range(0, e.horizon_years + 1))
    W = e.season_days * A
    lay = p.layout
    assert c[lay.flow(0, 0, 5)] == pytest.approx(p.buy[5] * W)
    assert c[lay.flow(0, 1, 5)] == pytest.approx(p.sell[5] * W)
    pv_cost = p.pv.panel_cost_eur + p.pv.panel_omca_eur_per_year * A
    assert c[lay.n_pv(0)] == pytest.approx(-pv_cost)
    L = p.bess.lifespan_years
    bess_cost = p.bess.unit_cost_eur * (1 + 1.03 ** -L) + p.bess.unit_omca_eur_per_year * A
    assert c[lay.n_bess(0)] == pytest.approx(-bess_cost)


def test_missing_repdays(tiny_config):
    with pytest.raises(StructureError):
        assemble(tiny_config, {}, None)


def test_assemble_periodic_wrap(tiny_problem):
    p = tiny_problem
    assert p.day_hours == 2 and p.n_hours == 8
    assert p.prev_hour(0) == 1 and p.prev_hour(2) == 3 and p.prev_hour(3) == 2


# -- solving ---------------------------------------------------------------------


def test_zero_demand_gives_zero_sizing():
    p = tiny_problem(3, n_participants=1, n_hours=8)
    q = _single(np.zeros(8), p.gen_per_panel[0])
    for solve in (solve_bnb, brute_force_oracle):
        s = solve(q)
        assert s.n_pv == [0] and s.n_bess == [0]
        assert s.objective == pytest.approx(0.0, abs=1e-9)


def test_free_pv_fills_roof():
    gen = np.array([0.0, 0.3, 0.4, 0.1])
    q = _single(np.ones(4), gen, pv=replace(PVSpec(), cost_eur_per_kw=0.0, opex_eur_per_kw_year=0.0,
                                            ca_eur_per_kw_year=0.0))
    oracle = brute_force_oracle(q)
    assert oracle.n_pv == [3]
    assert solve_bnb(q, gap_tol=0.0).n_pv == [3]


def test_tie_break_lexicographic():
    # free panels that never produce: every N_pv ties, the smallest wins
    q = _single(np.ones(4), np.zeros(4), pv=replace(PVSpec(), cost_eur_per_kw=0.0, opex_eur_per_kw_year=0.0,
                                                    ca_eur_per_kw_year=0.0))
    assert solve_bnb(q, gap_tol=0.0).n_pv == [0]
    assert brute_force_oracle(q).n_pv == [0]


@pytest.mark.parametrize("seed", range(6))
def test_bnb_matches_oracle(seed):
    p = tiny_problem(100 + seed)
    a = solve_bnb(p, gap_tol=0.0)
    b = brute_force_oracle(p)
    assert a.status == OPTIMAL
    assert a.objective == pytest.approx(b.objective, abs=1e-6)


def test_oracle_limits():
    p = tiny_problem(1, n_participants=1, n_hours=9)
    with pytest.raises(OracleLimitExceeded):
        brute_force_oracle(p)
    q = _single(np.ones(4), np.ones(4) * 0.1, bess=replace(BESSSpec(), max_units=2))
    with pytest.raises(OracleLimitExceeded):
        brute_force_oracle(q)


def test_tiny_fixture(tiny_problem, tiny_solution):
    assert tiny_solution.status == OPTIMAL
    assert tiny_solution.n_bess == [1, 1]
    o = brute_force_oracle(tiny_problem)
    assert tiny_solution.objective == pytest.approx(o.objective, abs=1e-6)
    assert tiny_solution.sizing_vector == o.sizing_vector


def test_zero_roof_participant(desk_solution):
    i = desk_solution.ids.index("p2")
    assert (desk_solution.n_pv[i], desk_solution.n_bess[i]) == (0, 0)


def test_desk_gap(desk_solution):
    assert desk_solution.status == OPTIMAL
    assert desk_solution.stats.gap <= 1e-4


def test_node_limit_not_proven(tiny_problem):
    s = solve_bnb(tiny_problem, gap_tol=0.0, node_limit=1)
    assert s.status == NOT_PROVEN
    assert s.stats.gap > 0


def test_threads_bit_identical():
    for seed in (7, 11):
        p = tiny_problem(seed, n_participants=2, n_hours=6)
        a = solve_bnb(p, gap_tol=0.0, threads=1)
        b = solve_bnb(p, gap_tol=0.0, threads=4)
        assert a.sizing_vector == b.sizing_vector
        assert a.objective == b.objective
        assert np.array_equal(a.x, b.x)


def test_monotone_roof():
    for seed in range(4):
        p = tiny_problem(200 + seed, n_participants=2, n_hours=5)
        p.np_max[:] = np.minimum(p.np_max, 2)
        base = solve_bnb(p, gap_tol=0.0).objective
        bigger = SizingProblem(p.ids, p.hours, p.demand, p.gen_per_panel, p.np_max + 1, p.pv, p.bess,
                               p.econ, p.tariff, p.zeta, day_hours=p.day_hours)
        assert solve_bnb(bigger, gap_tol=0.0).objective >= base - 1e-6


def test_monotone_incentive():
    for seed in range(4):
        p = tiny_problem(300 + seed, n_participants=2, n_hours=5)
        base = solve_bnb(p, gap_tol=0.0).objective
        tar = replace(p.tariff, share_eur_per_kwh=p.tariff.share_eur_per_kwh * 1.5)
        q = SizingProblem(p.ids, p.hours, p.demand, p.gen_per_panel, p.np_max, p.pv, p.bess,
                          p.econ, tar, p.zeta, day_hours=p.day_hours)
        assert solve_bnb(q, gap_tol=0.0).objective >= base - 1e-6


def test_max_payback_rows():
    p = tiny_problem(5, n_participants=2, n_hours=6)
    econ = replace(p.econ, max_payback_years=10)
    q = SizingProblem(p.ids, p.hours, p.demand, p.gen_per_panel, p.np_max, p.pv, p.bess,
                      econ, p.tariff, p.zeta, day_hours=p.day_hours)
    s = solve_bnb(q, gap_tol=0.0)
    np_, trajs, _, _ = recompute_net_profit(q, s)
    for tr in trajs:
        assert np.all(tr.npv[10:] >= -1e-6)


# -- checking ------------------------------------------------------------------


def test_check_solution_ok(tiny_problem, tiny_solution, desk_problem, desk_solution):
    assert check_solution(tiny_problem, tiny_solution) == []
    assert check_solution(desk_problem, desk_solution) == []


def test_check_flags_shared(tiny_problem, tiny_solution):
    sol = load_solution_copy(tiny_solution)
    d = sol.dispatch
    sells = sum(d.flows[pid]["sell"] for pid in d.ids)
    d.shared[0] = sells[0] + 0.01
    names = {v.constraint for v in check_solution(tiny_problem, sol)}
    assert "shared_le_sell" in names


def test_check_flags_periodicity(tiny_problem, tiny_solution):
    sol = load_solution_copy(tiny_solution)
    pid = next(p for p, nb in zip(sol.ids, sol.n_bess) if nb > 0)
    f = sol.dispatch.flows[pid]
    D = tiny_problem.day_hours
    f["soc"][D - 1] += 1e-3
    bad = [v for v in check_solution(tiny_problem, sol) if v.constraint == "periodicity"]
    assert bad and bad[0].participant == pid and bad[0].hour == 0
    assert max(periodicity_residuals(tiny_problem, sol)[pid]) >= 1e-3 - 1e-12


def test_periodicity_residuals(tiny_problem, tiny_solution, desk_problem, desk_solution):
    for p, s in ((tiny_problem, tiny_solution), (desk_problem, desk_solution)):
        for res in periodicity_residuals(p, s).values():
            assert len(res) == 4
            assert max(res) <= 1e-9


def test_complementarity(tiny_solution, desk_solution):
    for s in (tiny_solution, desk_solution):
        for f in s.dispatch.flows.values():
            assert np.max(f["charge"] * f["discharge"]) <= 1e-6


def test_shared_below_both_sides(desk_problem, desk_solution):
    d = desk_solution.dispatch
    net = sum(d.demand[p] + d.flows[p]["charge"] - d.flows[p]["discharge"] - d.flows[p]["self"] for p in d.ids)
    sells = sum(d.flows[p]["sell"] for p in d.ids)
    assert np.all(d.shared <= net + 1e-6)
    assert np.all(d.shared <= sells + 1e-6)


def test_recompute_matches_objective(tiny_problem, tiny_solution, desk_problem, desk_solution):
    for p, s in ((tiny_problem, tiny_solution), (desk_problem, desk_solution)):
        np_, _, _, _ = recompute_net_profit(p, s)
        assert np_ == pytest.approx(s.objective, abs=1e-6, rel=1e-12)


def test_solution_json_round_trip(tmp_path, tiny_problem, tiny_solution):
    path = tmp_path / "s.json"
    dump_solution(path, tiny_solution, tiny_problem)
    back = load_solution(path)
    assert back.sizing() == tiny_solution.sizing()
    assert back.objective == tiny_solution.objective
    for pid in back.ids:
        for k, v in tiny_solution.dispatch.flows[pid].items():
            assert np.array_equal(back.dispatch.flows[pid][k], v)
    assert check_solution(tiny_problem, back) == []
    raw = json.loads(path.read_text())
    assert raw["schema_version"] == 1
    assert sum(raw["zeta"]) == pytest.approx(1.0, abs=1e-12)


def load_solution_copy(sol):
    from recsizer.sizing.solution import from_json_dict, to_json_dict
    return from_json_dict(json.loads(json.dumps(to_json_dict(sol))))
