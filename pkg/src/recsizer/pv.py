"""Photovoltaic panel model: temperature-corrected output, fleet sums, costs."""

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, SeriesLengthMismatch, TimeSeries


@dataclass(frozen=True)
class PVFleetCosts:
    capex_eur: float
    omca_eur_per_year: float


def cell_temperature(E_t, theta_a, spec):
    """Cell temperature from irradiance (kW/m2) and ambient temperature (degC)."""
    E = np.asarray(E_t, dtype=np.float64)
    if np.any(E < 0):
        raise DomainError("irradiance must be non-negative")
    out = theta_a + (E / spec.stc_irradiance_kw_per_m2) * (spec.noct_degC - spec.stc_temp_degC)
    return float(out) if np.ndim(out) == 0 else out


def panel_power(E_t, theta_c, spec):
    """Output of one panel in kW; never negative."""
    E = np.asarray(E_t, dtype=np.float64)
    if np.any(E < 0):
        raise DomainError("irradiance must be non-negative")
    derate = 1.0 - (spec.gamma_pct_per_degC / 100.0) * (np.asarray(theta_c) - spec.stc_temp_degC)
    p = spec.rated_kw * (E / spec.stc_irradiance_kw_per_m2) * derate
    p = np.maximum(p, 0.0)
    return float(p) if np.ndim(p) == 0 else p


def panel_series(irradiance, ambient, spec):
    """Per-panel output for aligned weather arrays or series."""
    E = np.asarray(getattr(irradiance, "values", irradiance), dtype=np.float64)
    Ta = np.asarray(getattr(ambient, "values", ambient), dtype=np.float64)
    if E.shape != Ta.shape:
        raise SeriesLengthMismatch(f"irradiance has {E.size} samples, ambient {Ta.size}")
    return panel_power(E, cell_temperature(E, Ta, spec), spec)


def fleet_generation(weather, n_panels, spec):
    irr, amb = weather
    if n_panels < 0:
        raise DomainError("panel count must be non-negative")
    if isinstance(irr, TimeSeries) and isinstance(amb, TimeSeries):
        if irr.start != amb.start or irr.step_hours != amb.step_hours or len(irr) != len(amb):
            raise SeriesLengthMismatch("irradiance and ambient series are not aligned")
    p = n_panels * np.atleast_1d(panel_series(irr, amb, spec))
    if isinstance(irr, TimeSeries):
        return irr.with_values(p)
    return TimeSeries(None, p)


def max_panels(roof_area_m2, spec):
    if roof_area_m2 < 0:
        raise DomainError("roof area must be non-negative")
    n = math.floor(roof_area_m2 / spec.panel_area_m2)
    # guard against 2.4/2.4 style quotients landing a hair under an integer
    if (n + 1) * spec.panel_area_m2 <= roof_area_m2:
        n += 1
    return int(n)


def pv_costs(n_panels, spec):
    if n_panels < 0:
        raise DomainError("panel count must be non-negative")
    return PVFleetCosts(n_panels * spec.panel_cost_eur, n_panels * spec.panel_omca_eur_per_year)
