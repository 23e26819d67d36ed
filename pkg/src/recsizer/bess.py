"""Battery fleet model: state-of-charge update, bounds, costs, dispatch checks."""

from dataclasses import dataclass

import numpy as np

from .core import DomainError, SeriesLengthMismatch

COMPLEMENTARITY_TOL = 1e-6


class CapacityExceeded(ValueError):
    pass


@dataclass(frozen=True)
class BESSFleetBounds:
    soc_min_kwh: float
    soc_max_kwh: float
    p_charge_max_kw: float
    p_discharge_max_kw: float

    def __add__(self, other):
        return BESSFleetBounds(
            self.soc_min_kwh + other.soc_min_kwh,
            self.soc_max_kwh + other.soc_max_kwh,
            self.p_charge_max_kw + other.p_charge_max_kw,
            self.p_discharge_max_kw + other.p_discharge_max_kw,
        )


@dataclass(frozen=True)
class BESSFleetCosts:
    capex_eur: float
    omca_eur_per_year: float
    replacement_year: int


@dataclass(frozen=True)
class DispatchViolation:
    step: int
    constraint: str
    residual: float


def soc_step(S, p_c, p_d, dt, spec):
    if np.any(np.asarray(p_c) < 0) or np.any(np.asarray(p_d) < 0):
        raise DomainError("charge and discharge powers must be non-negative")
    return S + (spec.eta_c * p_c - p_d / spec.eta_d) * dt


def soc_step_inverse(S_next, p_c, p_d, dt, spec):
    return S_next - (spec.eta_c * p_c - p_d / spec.eta_d) * dt


def fleet_bounds(n_units, spec):
    if n_units < 0:
        raise DomainError("unit count must be non-negative")
    if n_units > spec.max_units:
        raise CapacityExceeded(f"{n_units} units exceeds the limit of {spec.max_units}")
    return BESSFleetBounds(
        n_units * spec.soc_min_kwh,
        n_units * spec.soc_max_kwh,
        n_units * spec.p_charge_max_kw,
        n_units * spec.p_discharge_max_kw,
    )


def bess_costs(n_units, spec):
    if n_units < 0:
        raise DomainError("unit count must be non-negative")
    return BESSFleetCosts(n_units * spec.unit_cost_eur, n_units * spec.unit_omca_eur_per_year,
                          int(spec.lifespan_years))


def validate_dispatch(soc, p_c, p_d, n_units, spec, dt=1.0, tol=1e-6,
                      comp_tol=COMPLEMENTARITY_TOL, periodic_days=None):
    """Check a dispatch against power, SOC and recursion limits.

    ``soc[t]`` is the state at the end of hour ``t``.  The state before hour
    ``t`` is ``soc[t-1]``; for ``t = 0`` (or the first hour of each day when
    ``periodic_days`` gives the day length) it is the day's closing state.
    Returns a list of :class:`DispatchViolation`, empty when the dispatch is ok.
    """
    soc = np.asarray(soc, dtype=np.float64)
    p_c = np.asarray(p_c, dtype=np.float64)
    p_d = np.asarray(p_d, dtype=np.float64)
    if not (soc.shape == p_c.shape == p_d.shape):
        raise SeriesLengthMismatch("soc, p_c and p_d must have equal length")
    T = soc.size
    day = periodic_days or T
    b = BESSFleetBounds(n_units * spec.soc_min_kwh, n_units * spec.soc_max_kwh,
                        n_units * spec.p_charge_max_kw, n_units * spec.p_discharge_max_kw)
    out = []
    for t in range(T):
        if p_c[t] < -tol:
            out.append(DispatchViolation(t, "charge_nonneg", -p_c[t]))
        if p_d[t] < -tol:
            out.append(DispatchViolation(t, "discharge_nonneg", -p_d[t]))
        if p_c[t] > b.p_charge_max_kw + tol:
            out.append(DispatchViolation(t, "charge_max", p_c[t] - b.p_charge_max_kw))
        if p_d[t] > b.p_discharge_max_kw + tol:
            out.append(DispatchViolation(t, "discharge_max", p_d[t] - b.p_discharge_max_kw))
        prod = p_c[t] * p_d[t]
        if prod > comp_tol:
            out.append(DispatchViolation(t, "simultaneity", prod))
        if soc[t] < b.soc_min_kwh - tol:
            out.append(DispatchViolation(t, "soc_min", b.soc_min_kwh - soc[t]))
        if soc[t] > b.soc_max_kwh + tol:
            out.append(DispatchViolation(t, "soc_max", soc[t] - b.soc_max_kwh))
        prev = soc[t - 1] if t % day else soc[t + day - 1]
        expect = prev + (spec.eta_c * p_c[t] - p_d[t] / spec.eta_d) * dt
        r = abs(soc[t] - expect)
        if r > tol:
            out.append(DispatchViolation(t, "soc_recursion", r))
    return out
