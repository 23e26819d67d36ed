"""Seeded synthetic weather and load years for fixtures and demos."""

import math
from datetime import datetime

import numpy as np

from .core import TimeSeries

YEAR_START = datetime(2023, 1, 1)


def _clock(n_hours):
    t = np.arange(n_hours, dtype=float)
    hour = t % 24
    doy = t / 24.0
    return t, hour, doy


def irradiance_year(seed=0, n_hours=8760, clouds=0.25, start=YEAR_START):
    """Clear-sky bell per day scaled by season, with random cloud damping (kW/m2)."""
    rng = np.random.default_rng(seed)
    t, hour, doy = _clock(n_hours)
    season = np.cos(2 * math.pi * (doy - 172) / 365.0)
    half_day = 6.0 + 2.5 * season
    peak = 0.75 + 0.2 * season
    x = (hour + 0.5 - 12.5) / half_day
    bell = np.where(np.abs(x) < 1, np.cos(0.5 * math.pi * x), 0.0)
    day_cloud = 1.0 - clouds * rng.random(n_hours // 24 + 1)
    e = peak * bell * day_cloud[(t // 24).astype(int)]
    return TimeSeries(start, np.round(np.maximum(e, 0.0), 6))


def ambient_year(seed=0, n_hours=8760, start=YEAR_START):
    rng = np.random.default_rng(seed + 1000)
    t, hour, doy = _clock(n_hours)
    base = 15.0 + 9.0 * np.cos(2 * math.pi * (doy - 200) / 365.0)
    daily = 4.0 * np.cos(2 * math.pi * (hour - 15) / 24.0)
    return TimeSeries(start, np.round(base + daily + rng.normal(0, 1.0, n_hours), 4))


def load_year(seed=0, scale=1.0, n_hours=8760, noise=0.05, start=YEAR_START):
    """Multiplicative daily x weekly x yearly household profile (kW)."""
    rng = np.random.default_rng(seed)
    t, hour, doy = _clock(n_hours)
    weekday = (np.floor(doy).astype(int) + start.weekday()) % 7
    daily = 0.35 * np.cos(2 * math.pi * (hour - 20) / 24.0) + 0.15 * np.cos(4 * math.pi * (hour - 8) / 24.0)
    weekly = np.where(weekday >= 5, 0.12, 0.0)
    yearly = 0.2 * np.cos(2 * math.pi * (doy - 15) / 365.0)
    phase = rng.uniform(-1, 1)
    logl = math.log(0.6 * scale) + daily + weekly + yearly + 0.05 * phase + noise * rng.standard_normal(n_hours)
    return TimeSeries(start, np.round(np.exp(logl), 6))


def tiny_problem(seed, n_participants=None, n_hours=None):
    """Random toy sizing instance inside the enumeration oracle's limits."""
    from dataclasses import replace
    from datetime import timedelta

    from .core import BESSSpec, EconomicParams, PVSpec, TariffSchedule
    from .sizing.problem import SizingProblem
    from .tariff import distribution_factors

    rng = np.random.default_rng(seed)
    N = n_participants or int(rng.integers(1, 3))
    T = n_hours or int(rng.integers(4, 9))
    demand = np.round(rng.uniform(0.05, 1.2, (N, T)), 3)
    per_panel = np.round(rng.uniform(0.0, 0.43, T) * (rng.random(T) > 0.2), 4)
    gen = np.tile(per_panel, (N, 1))
    np_max = rng.integers(0, 4, N)
    pv = replace(PVSpec(), cost_eur_per_kw=float(rng.uniform(20, 400)),
                 opex_eur_per_kw_year=float(rng.uniform(0, 3)), ca_eur_per_kw_year=0.2)
    bess = replace(BESSSpec(), cost_eur_per_kwh=float(rng.uniform(1, 40)),
                   opex_eur_per_kwh_year=float(rng.uniform(0, 0.5)), ca_eur_per_kwh_year=0.05,
                   max_units=int(rng.integers(0, 2) if rng.random() < 0.2 else 1))
    econ = EconomicParams(discount_rate_per_year=0.03, horizon_years=25)
    start = datetime(2023, 1, 2) + timedelta(hours=int(rng.integers(0, 24 * 7)))
    hours = tuple(start + timedelta(hours=k) for k in range(T))
    ids = [f"p{k + 1}" for k in range(N)]
    return SizingProblem(ids, hours, demand, gen, np_max, pv, bess, econ, TariffSchedule(),
                         distribution_factors(list(demand)), day_hours=T)


# ---------------------------------------------------------------------------
# on-disk fixtures

DESK_ROOFS = (120.0, 0.0, 80.0, 60.0, 150.0)
DESK_SCALES = (1.0, 1.5, 0.8, 1.2, 2.0)


def _bill(load, schedule):
    from .tariff import rate_series
    buy = rate_series(schedule, "buy", load.timestamps())
    return round(float(buy @ load.values) * load.step_hours, 2)


def write_desk_fixture(outdir, n_participants=5, seed=0):
    """One synthetic year of weather and loads plus a default-parameter config."""
    from pathlib import Path

    from .core import ParticipantSpec, RECConfig, TariffSchedule, WeatherSeries
    from .io import save_config, write_series_csv, write_weather_csv

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    irr, amb = irradiance_year(seed), ambient_year(seed)
    write_weather_csv(out / "weather.csv", irr, amb)
    parts = []
    for k in range(n_participants):
        pid = f"p{k + 1}"
        load = load_year(seed=seed + k, scale=DESK_SCALES[k % len(DESK_SCALES)])
        write_series_csv(out / f"{pid}.csv", load)
        parts.append(ParticipantSpec(pid, DESK_ROOFS[k % len(DESK_ROOFS)],
                                     annual_bill_eur=_bill(load, TariffSchedule()),
                                     demand_csv=f"{pid}.csv"))
    cfg = RECConfig(tuple(parts))
    save_config(out / "rec.toml", cfg)
    return cfg


TINY_HOURS = (12, 19)


def write_tiny_fixture(outdir):
    """Two participants, two clock hours per representative day (8 hours in all).

    Small enough for the enumeration oracle; batteries are cheap so that the
    optimum buys one.
    """
    import json
    from dataclasses import replace
    from datetime import date
    from pathlib import Path

    from .core import SEASONS, BESSSpec, ParticipantSpec, PVSpec, RECConfig
    from .extraction import RepresentativeDays, representative_dates
    from .io import repdays_to_dict, save_config

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    dates = representative_dates(date(2023, 1, 1))
    irr = {"winter": [0.45, 0.0], "spring": [0.8, 0.05], "summer": [0.9, 0.15], "fall": [0.6, 0.0]}
    amb = {"winter": [8.0, 4.0], "spring": [17.0, 13.0], "summer": [29.0, 24.0], "fall": [19.0, 14.0]}
    loads = {
        "a": {"winter": [0.05, 1.4], "spring": [0.04, 1.2], "summer": [0.06, 1.3], "fall": [0.05, 1.3]},
        "b": {"winter": [0.1, 0.9], "spring": [0.08, 0.8], "summer": [0.12, 1.0], "fall": [0.1, 0.9]},
    }
    rd = lambda prof: RepresentativeDays({s: prof[s] for s in SEASONS}, dict(dates))
    payload = repdays_to_dict({pid: rd(p) for pid, p in loads.items()}, (rd(irr), rd(amb)), TINY_HOURS)
    (out / "repdays.json").write_text(json.dumps(payload, indent=1))
    cfg = RECConfig(
        (ParticipantSpec("a", 7.2, annual_bill_eur=900.0), ParticipantSpec("b", 4.8, annual_bill_eur=700.0)),
        pv=replace(PVSpec(), cost_eur_per_kw=300.0),
        bess=replace(BESSSpec(), cost_eur_per_kwh=10.0, opex_eur_per_kwh_year=0.5, ca_eur_per_kwh_year=0.1,
                     max_units=1),
    )
    save_config(out / "rec.toml", cfg)
    return cfg


if __name__ == "__main__":
    import sys
    from pathlib import Path

    root = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    write_desk_fixture(root / "desk")
    write_tiny_fixture(root / "tiny")
