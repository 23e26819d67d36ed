"""Economic evaluation of a sizing and the report/plot files built from it."""

import csv
import json
from pathlib import Path

import numpy as np

from . import svg
from . import tariff as tf

SCHEMA_VERSION = 1


class ReportError(ValueError):
    pass


def _bill_before(part, dispatch, schedule, beta):
    if part.annual_bill_eur is not None:
        return float(part.annual_bill_eur)
    # without a stated bill, price the representative-day demand at the buy rates
    buy = tf.rate_series(schedule, "buy", dispatch.hours)
    return float(beta * buy @ dispatch.demand[part.id] * dispatch.step_hours)


def evaluate(cfg, sol):
    """Report dictionary for a solved sizing under ``cfg``."""
    d = sol.dispatch
    if d is None:
        raise ReportError("solution carries no dispatch")
    if d.demand is None:
        raise ReportError("solution dispatch has no demand profiles")
    econ = cfg.economics
    beta = econ.season_days
    ids = list(sol.ids)
    if ids != cfg.ids:
        raise ReportError(f"solution participants {ids} differ from config {cfg.ids}")
    comps, i_sh = tf.period_cashflow(d, cfg.tariff, d.step_hours)
    zeta = tf.distribution_factors([d.demand[pid] for pid in ids], d.step_hours)
    parts = []
    trajs = []
    for k, pid in enumerate(ids):
        tr = tf.npv_trajectory(comps[pid], sol.n_pv[k], sol.n_bess[k], cfg.pv, cfg.bess, econ, zeta[k], i_sh)
        trajs.append(tr)
        before = _bill_before(cfg.participant(pid), d, cfg.tariff, beta)
        parts.append({
            "id": pid,
            "n_pv": sol.n_pv[k],
            "n_bess": sol.n_bess[k],
            "zeta": float(zeta[k]),
            "npv_by_year_eur": [float(v) for v in tr.npv],
            "payback_years": tr.payback,
            "bill_before_eur": before,
            "bill_after_eur": float(tf.bill_after(before, comps[pid], zeta[k], beta, i_sh)),
            "annual_sell_revenue_eur": beta * comps[pid].r_sell,
            "annual_self_savings_eur": beta * comps[pid].r_self,
            "annual_incentive_eur": beta * zeta[k] * i_sh,
            "investment_by_year_eur": [float(v) for v in tr.ledger.inv],
            "operating_by_year_eur": [float(v) for v in tr.ledger.operating],
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "config_hash": sol.config_hash,
        "discount_rate_per_year": econ.discount_rate_per_year,
        "horizon_years": econ.horizon_years,
        "participants": parts,
        "community": {
            "net_profit_eur": tf.net_profit(trajs),
            "annual_incentive_eur": beta * i_sh,
            "shared_energy_by_hour_kwh": [float(v) * d.step_hours for v in d.shared],
        },
        "dispatch": {
            "hours": [h.isoformat() for h in d.hours],
            "participants": {
                pid: {name: [float(v) for v in arr] for name, arr in (
                    ("demand_kw", d.demand[pid]),
                    ("generation_kw", d.generation[pid] if d.generation else np.zeros(len(d.hours))),
                    ("self_kw", d.flows[pid]["self"]),
                    ("sell_kw", d.flows[pid]["sell"]),
                    ("charge_kw", d.flows[pid]["charge"]),
                    ("discharge_kw", d.flows[pid]["discharge"]),
                    ("soc_kwh", d.flows[pid]["soc"]),
                )}
                for pid in ids
            },
        },
    }


def dump_report(path, rep):
    with open(path, "w") as fh:
        json.dump(rep, fh, indent=1)


def load_report(path):
    try:
        with open(path) as fh:
            rep = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"{path}: {exc}") from None
    validate_report(rep)
    return rep


def validate_report(rep):
    if not isinstance(rep, dict) or rep.get("schema_version") != SCHEMA_VERSION:
        raise ReportError("report schema_version missing or unsupported")
    parts = rep.get("participants")
    if not isinstance(parts, list) or not parts:
        raise ReportError("report has no participants")
    for key in ("community", "dispatch"):
        if key not in rep:
            raise ReportError(f"report lacks '{key}'")
    for p in parts:
        for key in ("id", "npv_by_year_eur", "bill_before_eur", "bill_after_eur", "annual_incentive_eur"):
            if key not in p:
                raise ReportError(f"participant entry lacks '{key}'")
        if p["id"] not in rep["dispatch"].get("participants", {}):
            raise ReportError(f"no dispatch for participant {p['id']!r}")


# ---------------------------------------------------------------------------
# plots


def _tables(rep):
    """Every plot as ``name -> (kind, title, x header, x, {column: values}, labels)``."""
    parts = rep["participants"]
    ids = [p["id"] for p in parts]
    years = list(range(len(parts[0]["npv_by_year_eur"])))
    hours = list(range(len(rep["community"]["shared_energy_by_hour_kwh"])))
    out = {
        "npv": ("line", "Cumulative NPV by participant", "year", years,
                {p["id"]: p["npv_by_year_eur"] for p in parts}, ("year", "EUR")),
        "bills": ("bar", "Annual electricity bill", "participant", ids,
                  {"before": [p["bill_before_eur"] for p in parts],
                   "after": [p["bill_after_eur"] for p in parts]}, ("participant", "EUR/year")),
        "incentives": ("bar", "Annual shared-energy incentive", "participant", ids,
                       {"incentive": [p["annual_incentive_eur"] for p in parts]}, ("participant", "EUR/year")),
        "shared_energy": ("line", "Shared energy over the representative days", "hour", hours,
                          {"shared": rep["community"]["shared_energy_by_hour_kwh"]}, ("hour", "kWh")),
    }
    for pid in ids:
        dp = rep["dispatch"]["participants"][pid]
        cols = {k.rsplit("_", 1)[0]: v for k, v in dp.items()}
        out[f"dispatch_{pid}"] = ("line", f"Dispatch of {pid}", "hour", hours, cols, ("hour", "kW / kWh"))
    return out


def _safe(name):
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def write_plots(rep, outdir, fmt="svg"):
    """Write every plot; returns the list of paths written."""
    validate_report(rep)
    if fmt not in ("svg", "csv"):
        raise ReportError(f"unknown format {fmt!r}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (kind, title, xh, x, cols, (xl, yl)) in _tables(rep).items():
        base = outdir / _safe(name)
        with open(base.with_suffix(".csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([xh] + list(cols))
            for i, xv in enumerate(x):
                w.writerow([xv] + [repr(float(cols[c][i])) for c in cols])
        written.append(base.with_suffix(".csv"))
        if fmt == "svg":
            if kind == "line":
                text = svg.line_chart(title, x, cols, xl, yl)
            else:
                text = svg.bar_chart(title, x, cols, xl, yl)
            base.with_suffix(".svg").write_text(text)
            written.append(base.with_suffix(".svg"))
    return written
