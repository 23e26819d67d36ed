"""CSV series and TOML config (de)serialization."""

import csv
import hashlib
import json
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import (SEASONS, BESSSpec, ConfigError, EconomicParams, ParticipantSpec,
                   PVSpec, RECConfig, TariffSchedule, TimeSeries, Violation,
                   WeatherSeries, spec_fields)

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A file does not follow its documented layout."""


def read_series_csv(path):
    """Read a ``timestamp,value`` CSV into an hourly-or-uniform TimeSeries."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    with fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "value"]:
            raise SchemaError(f"{path}: header must be 'timestamp,value'")
        stamps, values = [], []
        for k, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise SchemaError(f"{path}:{k}: expected 2 columns")
            try:
                stamps.append(datetime.fromisoformat(row[0].strip()))
                values.append(float(row[1]))
            except ValueError as exc:
                raise SchemaError(f"{path}:{k}: {exc}") from None
    if not stamps:
        raise SchemaError(f"{path}: no samples")
    step = 1.0
    if len(stamps) > 1:
        diffs = {(b - a).total_seconds() for a, b in zip(stamps, stamps[1:])}
        if len(diffs) != 1 or min(diffs) <= 0:
            raise SchemaError(f"{path}: timestamps are not uniformly increasing")
        step = diffs.pop() / 3600.0
    return TimeSeries(stamps[0], np.array(values), step)


def write_series_csv(path, series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value"])
        for t, v in zip(series.timestamps(), series.values):
            w.writerow([t.isoformat(), repr(float(v))])


# ---------------------------------------------------------------------------
# config

_SECTIONS = (("pv", PVSpec), ("bess", BESSSpec), ("economics", EconomicParams))


def _section(raw, name, cls, problems):
    table = raw.get(name, {})
    if not isinstance(table, dict):
        problems.append(Violation("SchemaError", name, "must be a table"))
        return cls()
    known = set(spec_fields(cls()))
    unknown = sorted(set(table) - known)
    for key in unknown:
        problems.append(Violation("UnknownKey", f"{name}.{key}", "not a recognised field"))
    kw = {k: v for k, v in table.items() if k in known}
    return cls(**kw)


def config_from_dict(raw, base_dir=".", load_series=True):
    """Build a RECConfig from a parsed TOML mapping (not yet validated)."""
    base = Path(base_dir)
    problems = []
    ver = raw.get("schema_version")
    if ver != SCHEMA_VERSION:
        problems.append(Violation("SchemaVersion", "schema_version", f"expected {SCHEMA_VERSION}, got {ver!r}"))
    econ = raw.get("economics", {})
    if "discount_rate_per_year" not in econ:
        problems.append(Violation("MissingField", "economics.discount_rate_per_year",
                                  "the discount rate must be stated explicitly"))
    pv = _section(raw, "pv", PVSpec, problems)
    bess = _section(raw, "bess", BESSSpec, problems)
    economics = _section(raw, "economics", EconomicParams, problems)

    t = dict(raw.get("tariff", {}))
    if "holidays" in t:
        t["holidays"] = tuple(str(d) for d in t["holidays"])
    unknown = sorted(set(t) - set(spec_fields(TariffSchedule())))
    for key in unknown:
        problems.append(Violation("UnknownKey", f"tariff.{key}", "not a recognised field"))
        t.pop(key)
    tariff = TariffSchedule(**t)

    def series(rel, where):
        if not load_series or rel is None:
            return None
        try:
            return read_series_csv(base / rel)
        except SchemaError as exc:
            problems.append(Violation("SchemaError", where, str(exc)))
            return None

    parts = []
    for k, p in enumerate(raw.get("participants", [])):
        where = f"participants[{k}]"
        if "id" not in p or "roof_area_m2" not in p:
            problems.append(Violation("MissingField", where, "id and roof_area_m2 are required"))
            continue
        parts.append(ParticipantSpec(
            id=str(p["id"]),
            roof_area_m2=float(p["roof_area_m2"]),
            demand=series(p.get("demand_csv"), f"{where}.demand_csv"),
            annual_bill_eur=p.get("annual_bill_eur"),
            demand_csv=p.get("demand_csv"),
        ))
    weather = None
    w = raw.get("weather")
    if w:
        irr = series(w.get("irradiance_csv"), "weather.irradiance_csv")
        amb = series(w.get("ambient_csv"), "weather.ambient_csv")
        if load_series and (irr is None or amb is None):
            problems.append(Violation("MissingField", "weather", "irradiance_csv and ambient_csv are both required"))
        weather = WeatherSeries(irr, amb, w.get("irradiance_csv"), w.get("ambient_csv"))
    if problems:
        raise ConfigError(problems)
    return RECConfig(tuple(parts), pv, bess, tariff, economics, weather)


def load_config(path, load_series=True):
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return config_from_dict(raw, path.parent, load_series)


def _drop_none(d):
    return {k: v for k, v in d.items() if v is not None}


def config_to_dict(cfg):
    out = {"schema_version": SCHEMA_VERSION}
    out["pv"] = spec_fields(cfg.pv)
    out["bess"] = spec_fields(cfg.bess)
    t = spec_fields(cfg.tariff)
    t["holidays"] = list(t["holidays"])
    out["tariff"] = t
    out["economics"] = _drop_none(spec_fields(cfg.economics))
    if cfg.weather is not None:
        out["weather"] = _drop_none({"irradiance_csv": cfg.weather.irradiance_csv,
                                     "ambient_csv": cfg.weather.ambient_csv})
    out["participants"] = [
        _drop_none({"id": p.id, "roof_area_m2": p.roof_area_m2,
                    "annual_bill_eur": p.annual_bill_eur, "demand_csv": p.demand_csv})
        for p in cfg.participants
    ]
    return out


def dumps_config(cfg):
    return tomli_w.dumps(config_to_dict(cfg))


def loads_config(text, base_dir=".", load_series=True):
    return config_from_dict(tomllib.loads(text), base_dir, load_series)


def save_config(path, cfg):
    Path(path).write_text(dumps_config(cfg))


def config_hash(cfg):
    """Digest of everything that affects sizing and economics.

    File locations are left out, so moving the CSVs does not change it.
    """
    d = config_to_dict(cfg)
    d.pop("weather", None)
    for p in d["participants"]:
        p.pop("demand_csv", None)
    blob = json.dumps(d, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def file_hash(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def strip_series(cfg):
    """Config with demand and weather series dropped (paths kept)."""
    parts = [replace(p, demand=None) for p in cfg.participants]
    return replace(cfg, participants=tuple(parts), weather=None)


# ---------------------------------------------------------------------------
# weather and representative days

def read_weather_csv(path):
    """Read ``timestamp,irradiance,ambient`` into an (irradiance, ambient) pair."""
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    with fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "irradiance", "ambient"]:
            raise SchemaError(f"{path}: header must be 'timestamp,irradiance,ambient'")
        stamps, irr, amb = [], [], []
        for k, row in enumerate(rows, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise SchemaError(f"{path}:{k}: expected 3 columns")
            try:
                stamps.append(datetime.fromisoformat(row[0].strip()))
                irr.append(float(row[1]))
                amb.append(float(row[2]))
            except ValueError as exc:
                raise SchemaError(f"{path}:{k}: {exc}") from None
    if not stamps:
        raise SchemaError(f"{path}: no samples")
    step = 1.0
    if len(stamps) > 1:
        diffs = {(b - a).total_seconds() for a, b in zip(stamps, stamps[1:])}
        if len(diffs) != 1 or min(diffs) <= 0:
            raise SchemaError(f"{path}: timestamps are not uniformly increasing")
        step = diffs.pop() / 3600.0
    return TimeSeries(stamps[0], np.array(irr), step), TimeSeries(stamps[0], np.array(amb), step)


def write_weather_csv(path, irradiance, ambient):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "irradiance", "ambient"])
        for t, a, b in zip(irradiance.timestamps(), irradiance.values, ambient.values):
            w.writerow([t.isoformat(), repr(float(a)), repr(float(b))])


def repdays_to_dict(load_days, weather_days, hours_of_day=None, models=None):
    irr, amb = weather_days
    prof = lambda rd: {s: [float(v) for v in rd.profiles[s]] for s in SEASONS}
    out = {
        "schema_version": SCHEMA_VERSION,
        "hours_of_day": list(range(24)) if hours_of_day is None else [int(h) for h in hours_of_day],
        "dates": {s: irr.dates[s].isoformat() for s in SEASONS},
        "participants": {pid: {"profiles_kw": prof(rd)} for pid, rd in load_days.items()},
        "weather": {"irradiance_kw_per_m2": prof(irr), "ambient_degC": prof(amb)},
    }
    for pid, info in (models or {}).items():
        out["participants"][pid].update(info)
    return out


def repdays_from_dict(raw):
    """Inverse of :func:`repdays_to_dict`: ``(load_days, weather_days, hours_of_day)``."""
    from .extraction import RepresentativeDays
    if not isinstance(raw, dict) or raw.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("repdays: schema_version missing or unsupported")
    try:
        hod = [int(h) for h in raw.get("hours_of_day", range(24))]
        dates = {s: datetime.fromisoformat(raw["dates"][s]).date() for s in SEASONS}

        def rd(profiles):
            out = {}
            for s in SEASONS:
                v = np.array(profiles[s], dtype=float)
                if v.shape != (len(hod),):
                    raise SchemaError(f"repdays: season {s} needs {len(hod)} values")
                out[s] = v
            return RepresentativeDays(out, dict(dates))

        loads = {pid: rd(p["profiles_kw"]) for pid, p in raw["participants"].items()}
        w = raw["weather"]
        weather = (rd(w["irradiance_kw_per_m2"]), rd(w["ambient_degC"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"repdays: malformed ({exc!r})") from None
    if not loads:
        raise SchemaError("repdays: no participants")
    return loads, weather, hod


def load_json(path, what="file"):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
