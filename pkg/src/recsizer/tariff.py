"""Time-of-use bands, cash flows, distribution factors, NPV and bills."""

from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .core import DomainError

F1, F2, F3 = "F1", "F2", "F3"
WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


class DegenerateDemand(ValueError):
    pass


def band_of(weekday, hour):
    """Band for ``weekday`` (0=Mon..6=Sun, or a name) and ``hour`` in 1..24."""
    if isinstance(weekday, str):
        weekday = WEEKDAYS.index(weekday[:3].title())
    if not (0 <= weekday <= 6 and 1 <= hour <= 24):
        raise ValueError(f"invalid weekday/hour ({weekday}, {hour})")
    if weekday == 6 or hour == 24 or hour <= 7:
        return F3
    if weekday == 5:
        return F2
    if 9 <= hour <= 19:
        return F1
    return F2


def week_table():
    """7 x 24 table of bands, rows Mon..Sun, columns hour 1..24."""
    return [[band_of(d, h) for h in range(1, 25)] for d in range(7)]


def _holiday_set(holidays):
    out = set()
    for h in holidays:
        out.add(h if isinstance(h, date) else date.fromisoformat(str(h)))
    return out


def band_at(ts, holidays=()):
    """Band of the hour starting at ``ts`` (its label is clock hour + 1)."""
    if holidays and ts.date() in _holiday_set(holidays):
        return F3
    return band_of(ts.weekday(), ts.hour + 1)


def bands_for(span, holidays=()):
    hol = _holiday_set(holidays)
    return [F3 if ts.date() in hol else band_of(ts.weekday(), ts.hour + 1) for ts in span]


def rate_series(schedule, kind, span):
    rates = {"buy": schedule.buy_eur_per_kwh, "sell": schedule.sell_eur_per_kwh}[kind]
    return np.array([rates[b] for b in bands_for(span, schedule.holidays)])


@dataclass(frozen=True)
class CashFlowComponents:
    r_sell: float
    r_self: float
    i_sh: float = 0.0


def period_cashflow(dispatch, schedule, dt=None):
    """Per-participant revenue and savings plus the community incentive.

    Returns ``(components_by_id, i_sh)``.
    """
    dt = dispatch.step_hours if dt is None else dt
    buy = rate_series(schedule, "buy", dispatch.hours)
    sell = rate_series(schedule, "sell", dispatch.hours)
    out = {}
    for pid in dispatch.ids:
        ps = np.asarray(dispatch.flow(pid, "sell"))
        pf = np.asarray(dispatch.flow(pid, "self"))
        if np.any(ps < 0) or np.any(pf < 0):
            raise DomainError(f"negative flow for participant {pid}")
        out[pid] = CashFlowComponents(float(sell @ ps) * dt, float(buy @ pf) * dt)
    sh = np.asarray(dispatch.shared)
    if np.any(sh < 0):
        raise DomainError("negative shared power")
    i_sh = float(np.sum(sh)) * schedule.incentive_eur_per_kwh * dt
    return out, i_sh


def distribution_factors(demands, dt=1.0):
    tot = np.array([float(np.sum(getattr(d, "values", d))) * getattr(d, "step_hours", dt) for d in demands])
    if tot.size == 0 or not tot.sum() > 0:
        raise DegenerateDemand("total demand must be positive")
    return tot / tot.sum()


@dataclass(frozen=True)
class CashFlowLedger:
    inv: np.ndarray
    operating: np.ndarray

    @property
    def net(self):
        return self.operating - self.inv


@dataclass(frozen=True)
class NPVTrajectory:
    npv: np.ndarray
    payback: int = None
    ledger: CashFlowLedger = None

    @property
    def terminal(self):
        return float(self.npv[-1])


def period_net(components, zeta, i_sh):
    """Income over the representative days for one participant."""
    return components.r_sell + components.r_self + zeta * i_sh


def build_ledger(period_income, n_pv, n_bess, pv_spec, bess_spec, econ, season_days=None):
    """Yearly investment and operating entries for one participant."""
    Y = int(econ.horizon_years)
    beta = econ.season_days if season_days is None else season_days
    inv = np.zeros(Y + 1)
    inv[0] = n_pv * pv_spec.panel_cost_eur + n_bess * bess_spec.unit_cost_eur
    L = int(bess_spec.lifespan_years)
    if n_bess > 0 and L <= Y:
        inv[L] += n_bess * bess_spec.unit_cost_eur
    omca = n_pv * pv_spec.panel_omca_eur_per_year + n_bess * bess_spec.unit_omca_eur_per_year
    operating = (beta * period_income - omca) * econ.operating_mask()
    return CashFlowLedger(inv, operating)


def npv_from_ledger(ledger, r):
    if r < 0:
        raise DomainError("discount rate must be non-negative")
    y = np.arange(ledger.inv.size, dtype=float)
    return np.cumsum(ledger.net / (1.0 + r) ** y)


def npv_trajectory(components, n_pv, n_bess, pv_spec, bess_spec, econ, zeta, i_sh):
    """Cumulative discounted NPV for years 0..horizon and its payback year."""
    if econ.discount_rate_per_year < 0:
        raise DomainError("discount rate must be non-negative")
    led = build_ledger(period_net(components, zeta, i_sh), n_pv, n_bess, pv_spec, bess_spec, econ)
    npv = npv_from_ledger(led, econ.discount_rate_per_year)
    return NPVTrajectory(npv, payback(npv), led)


def payback(traj, horizon=None):
    """First year from which the NPV stays non-negative, or None."""
    npv = np.asarray(getattr(traj, "npv", traj), dtype=float)
    if horizon is not None:
        npv = npv[: horizon + 1]
    pb = None
    for m in range(npv.size - 1, -1, -1):
        if npv[m] >= 0:
            pb = m
        else:
            break
    return pb


def net_profit(trajectories):
    return float(sum(float(np.asarray(getattr(t, "npv", t))[-1]) for t in trajectories))


def bill_after(eb_before, components, zeta, beta, i_sh=None):
    if i_sh is None:
        i_sh = components.i_sh
    return eb_before - beta * period_net(components, zeta, i_sh)


def annuity_factor(econ):
    """Sum of discount factors over the years carrying operating flows."""
    return float(np.sum(econ.discount_factors() * econ.operating_mask()))


def replacement_factor(bess_spec, econ):
    L = int(bess_spec.lifespan_years)
    if L > econ.horizon_years:
        return 0.0
    return (1.0 + econ.discount_rate_per_year) ** (-L)


def period_hours(start, days):
    """Hourly interval starts for consecutive calendar days."""
    out = []
    for d in days:
        base = datetime(d.year, d.month, d.day)
        out.extend(base.replace(hour=h) for h in range(24))
    return tuple(out)
