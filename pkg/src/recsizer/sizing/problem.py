"""Mixed-integer model of the periodic-day sizing problem.

Per participant the columns are ``[N_pv, N_bess]`` followed by hourly blocks
``self, sell, charge, discharge, soc, b_charge, b_discharge``; one block of
community shared power closes the vector.  That gives ``N (2 + 7T) + T``
columns.  ``soc[t]`` is the state at the end of hour ``t``; the state before
the first hour of a day is the same day's closing state, which imposes the
daily periodicity without extra columns.
"""

from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np
import scipy.sparse as sp

from ..core import FLOWS, SEASONS
from ..lp import EQ, GE, LE, LinearProgram, StructureError
from .. import pv as pvm
from .. import tariff as tf

SELF, SELL, CHARGE, DISCHARGE, SOC, BC, BD = range(7)


@dataclass(frozen=True)
class Layout:
    n_participants: int
    n_hours: int

    @property
    def block(self):
        return 2 + 7 * self.n_hours

    @property
    def n_vars(self):
        return self.n_participants * self.block + self.n_hours

    def n_pv(self, n):
        return n * self.block

    def n_bess(self, n):
        return n * self.block + 1

    def flow(self, n, k, t=None):
        s = n * self.block + 2 + k * self.n_hours
        if t is None:
            return slice(s, s + self.n_hours)
        return s + t

    def shared(self, t=None):
        s = self.n_participants * self.block
        if t is None:
            return slice(s, s + self.n_hours)
        return s + t

    def sizing_indices(self):
        return [i for n in range(self.n_participants) for i in (self.n_pv(n), self.n_bess(n))]

    def binary_indices(self):
        T = self.n_hours
        out = []
        for n in range(self.n_participants):
            for k in (BC, BD):
                s = self.flow(n, k).start
                out.extend(range(s, s + T))
        return out


@dataclass(eq=False)
class SizingProblem:
    ids: list
    hours: tuple
    demand: np.ndarray          # (N, T) kW
    gen_per_panel: np.ndarray   # (N, T) kW per panel
    np_max: np.ndarray          # (N,) panels
    pv: object
    bess: object
    econ: object
    tariff: object
    zeta: np.ndarray
    day_hours: int = 24
    step_hours: float = 1.0
    buy: np.ndarray = field(default=None)
    sell: np.ndarray = field(default=None)

    def __post_init__(self):
        self.demand = np.atleast_2d(np.asarray(self.demand, dtype=float))
        self.gen_per_panel = np.atleast_2d(np.asarray(self.gen_per_panel, dtype=float))
        self.np_max = np.asarray(self.np_max, dtype=int)
        self.zeta = np.asarray(self.zeta, dtype=float)
        N, T = self.demand.shape
        if self.gen_per_panel.shape != (N, T) or self.np_max.shape != (N,) or self.zeta.shape != (N,):
            raise StructureError("per-participant arrays disagree in shape")
        if len(self.hours) != T or len(self.ids) != N:
            raise StructureError("hours/ids do not match the series")
        if T % self.day_hours:
            raise StructureError(f"{T} hours is not a whole number of {self.day_hours}-hour days")
        if abs(self.zeta.sum() - 1.0) > 1e-9:
            raise StructureError("distribution factors must sum to one")
        if self.buy is None:
            self.buy = tf.rate_series(self.tariff, "buy", self.hours)
        if self.sell is None:
            self.sell = tf.rate_series(self.tariff, "sell", self.hours)
        self.layout = Layout(N, T)
        self._lp = None

    @property
    def n_participants(self):
        return self.demand.shape[0]

    @property
    def n_hours(self):
        return self.demand.shape[1]

    @property
    def nb_max(self):
        return int(self.bess.max_units)

    @property
    def big_m_charge(self):
        return self.nb_max * self.bess.p_charge_max_kw

    @property
    def big_m_discharge(self):
        return self.nb_max * self.bess.p_discharge_max_kw

    def prev_hour(self, t):
        """Hour whose closing state opens hour ``t`` (cyclic within its day)."""
        D = self.day_hours
        return t - 1 if t % D else t + D - 1

    # -- objective ----------------------------------------------------------

    def flow_weight(self, econ=None, upto=None):
        """Present value of one euro per representative period."""
        econ = econ or self.econ
        w = econ.discount_factors() * econ.operating_mask()
        if upto is not None:
            w = w[: upto + 1]
        return econ.season_days * float(w.sum())

    def unit_values(self, upto=None):
        """Present-value cost of one panel and one battery unit."""
        econ = self.econ
        w = econ.discount_factors() * econ.operating_mask()
        Y = econ.horizon_years if upto is None else upto
        A = float(w[: Y + 1].sum())
        L = int(self.bess.lifespan_years)
        repl = (1.0 + econ.discount_rate_per_year) ** (-L) if L <= Y else 0.0
        pv_cost = self.pv.panel_cost_eur + self.pv.panel_omca_eur_per_year * A
        bess_cost = self.bess.unit_cost_eur * (1.0 + repl) + self.bess.unit_omca_eur_per_year * A
        return pv_cost, bess_cost

    def objective_terms(self, upto=None):
        """Per-participant coefficient vectors whose sum is the objective."""
        lay = self.layout
        dt = self.step_hours
        W = self.flow_weight(upto=upto)
        pv_cost, bess_cost = self.unit_values(upto)
        inc = self.tariff.incentive_eur_per_kwh
        out = []
        for n in range(self.n_participants):
            c = np.zeros(lay.n_vars)
            c[lay.flow(n, SELF)] = self.buy * dt * W
            c[lay.flow(n, SELL)] = self.sell * dt * W
            c[lay.shared()] = self.zeta[n] * inc * dt * W
            c[lay.n_pv(n)] = -pv_cost
            c[lay.n_bess(n)] = -bess_cost
            out.append(c)
        return out

    def objective(self):
        return np.sum(self.objective_terms(), axis=0)

    # -- constraints --------------------------------------------------------

    def bounds(self):
        lay = self.layout
        lo = np.zeros(lay.n_vars)
        hi = np.full(lay.n_vars, np.inf)
        for n in range(self.n_participants):
            hi[lay.n_pv(n)] = self.np_max[n]
            hi[lay.n_bess(n)] = self.nb_max
            hi[lay.flow(n, BC)] = 1.0
            hi[lay.flow(n, BD)] = 1.0
        return lo, hi

    def constraints(self):
        """Rows as ``(A, senses, b, labels)``; labels name each row's family."""
        lay = self.layout
        N, T = self.n_participants, self.n_hours
        b = self.bess
        rows, cols, vals = [], [], []
        senses, rhs, labels = [], [], []

        def row(entries, sense, r, label):
            i = len(senses)
            for j, v in entries:
                rows.append(i)
                cols.append(j)
                vals.append(v)
            senses.append(sense)
            rhs.append(r)
            labels.append(label)

        Mc, Md = self.big_m_charge, self.big_m_discharge
        for n in range(N):
            npv, nb = lay.n_pv(n), lay.n_bess(n)
            for t in range(T):
                g = self.gen_per_panel[n, t]
                f = lambda k, tt=t: lay.flow(n, k, tt)
                row([(f(SELL), 1.0), (f(SELF), 1.0), (npv, -g)], EQ, 0.0, "sell_balance")
                row([(f(SELF), 1.0), (npv, -g)], LE, 0.0, "self_le_pv")
                row([(f(SELF), 1.0), (f(CHARGE), -1.0), (f(DISCHARGE), 1.0)], LE, self.demand[n, t], "self_le_demand")
                row([(f(CHARGE), 1.0), (npv, -g)], LE, 0.0, "charge_le_pv")
                row([(f(CHARGE), 1.0), (f(BC), -Mc)], LE, 0.0, "charge_switch")
                row([(f(CHARGE), 1.0), (nb, -b.p_charge_max_kw)], LE, 0.0, "charge_units")
                row([(f(DISCHARGE), 1.0), (f(BD), -Md)], LE, 0.0, "discharge_switch")
                row([(f(DISCHARGE), 1.0), (nb, -b.p_discharge_max_kw)], LE, 0.0, "discharge_units")
                row([(f(BC), 1.0), (f(BD), 1.0)], LE, 1.0, "one_direction")
                row([(f(SOC), 1.0), (nb, -b.soc_max_kwh)], LE, 0.0, "soc_max")
                row([(f(SOC), 1.0), (nb, -b.soc_min_kwh)], GE, 0.0, "soc_min")
                dt = self.step_hours
                row([(f(SOC), 1.0), (lay.flow(n, SOC, self.prev_hour(t)), -1.0),
                     (f(CHARGE), -b.eta_c * dt), (f(DISCHARGE), dt / b.eta_d)], EQ, 0.0, "soc_recursion")
        for t in range(T):
            ent = [(lay.shared(t), 1.0)]
            for n in range(N):
                ent += [(lay.flow(n, CHARGE, t), -1.0), (lay.flow(n, DISCHARGE, t), 1.0),
                        (lay.flow(n, SELF, t), 1.0)]
            row(ent, LE, float(self.demand[:, t].sum()), "shared_le_net_demand")
            ent = [(lay.shared(t), 1.0)] + [(lay.flow(n, SELL, t), -1.0) for n in range(N)]
            row(ent, LE, 0.0, "shared_le_sell")
        mp = self.econ.max_payback_years
        if mp is not None:
            for m in range(int(mp), int(self.econ.horizon_years) + 1):
                for n, c in enumerate(self.objective_terms(upto=m)):
                    nz = np.flatnonzero(c)
                    row(list(zip(nz, c[nz])), GE, 0.0, f"payback_{m}")
        A = sp.csr_matrix((vals, (rows, cols)), shape=(len(senses), lay.n_vars))
        return A, tuple(senses), np.array(rhs), labels

    def lp(self):
        if self._lp is None:
            A, senses, b, labels = self.constraints()
            lo, hi = self.bounds()
            self._lp = LinearProgram(self.objective(), A, senses, b, lo, hi, sense="max")
            self.row_labels = labels
        return self._lp


def synthetic_hours(n_hours, start=datetime(2023, 1, 4)):
    return tuple(start + timedelta(hours=k) for k in range(n_hours))


def assemble(config, load_days, weather_days, hours_of_day=None):
    """Build the sizing problem from a config and representative days.

    ``load_days`` maps participant id to :class:`RepresentativeDays`;
    ``weather_days`` is the ``(irradiance, ambient)`` pair.  Profiles hold one
    value per clock hour in ``hours_of_day`` (default all 24); a shorter list
    models a truncated day that still wraps periodically.
    """
    hod = list(range(24)) if hours_of_day is None else [int(h) for h in hours_of_day]
    if not hod or any(h < 0 or h > 23 for h in hod) or sorted(set(hod)) != hod:
        raise StructureError(f"hours_of_day must be increasing clock hours, got {hod}")
    ids = config.ids
    missing = [pid for pid in ids if pid not in load_days]
    if missing:
        raise StructureError(f"no representative days for participants {missing}")
    if weather_days is None:
        raise StructureError("no representative weather days")
    irr, amb = weather_days
    for rd in (irr, amb, *(load_days[p] for p in ids)):
        if any(s not in rd.profiles or len(rd.profiles[s]) != len(hod) for s in SEASONS):
            raise StructureError(f"representative days need {len(hod)} values for each season")
    dates = irr.dates
    hours = []
    for s in SEASONS:
        d = dates[s]
        base = datetime(d.year, d.month, d.day)
        hours.extend(base + timedelta(hours=h) for h in hod)
    demand = np.array([load_days[p].stacked() for p in ids])
    per_panel = pvm.panel_series(irr.stacked(), amb.stacked(), config.pv)
    gen = np.tile(per_panel, (len(ids), 1))
    np_max = [pvm.max_panels(p.roof_area_m2, config.pv) for p in config.participants]
    zeta = tf.distribution_factors(list(demand))
    return SizingProblem(list(ids), tuple(hours), demand, gen, np_max, config.pv, config.bess,
                         config.economics, config.tariff, zeta, day_hours=len(hod))
