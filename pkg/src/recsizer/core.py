"""Shared domain types and configuration validation.

Every numeric field name carries its unit so the serialized config is
self-describing.  All types are frozen; :func:`validate_config` checks every
invariant at once and reports all violations together.
"""

from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timedelta

import numpy as np

BANDS = ("F1", "F2", "F3")
SEASONS = ("winter", "spring", "summer", "fall")


@dataclass(frozen=True)
class Violation:
    code: str
    where: str
    message: str

    def __str__(self):
        return f"{self.code} at {self.where}: {self.message}"


class ConfigError(ValueError):
    """Raised by :func:`validate_config`; ``violations`` lists every problem."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def codes(self):
        return [v.code for v in self.violations]


class DomainError(ValueError):
    """Input outside the domain of a model equation."""


class SeriesLengthMismatch(ValueError):
    """Two series that must be aligned are not."""


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled series; ``values`` is a read-only float array."""

    start: datetime
    values: np.ndarray
    step_hours: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.start == other.start
            and self.step_hours == other.step_hours
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @property
    def span_hours(self):
        return len(self) * self.step_hours

    def timestamps(self):
        step = timedelta(hours=self.step_hours)
        return [self.start + k * step for k in range(len(self))]

    def with_values(self, values):
        return TimeSeries(self.start, values, self.step_hours)

    def problems(self, where, nonnegative=True):
        out = []
        if not self.step_hours > 0:
            out.append(Violation("NonPositiveStep", where, f"step_hours={self.step_hours}"))
        if len(self) < 1:
            out.append(Violation("EmptySeries", where, "series has no samples"))
        if not np.all(np.isfinite(self.values)):
            out.append(Violation("NonFinite", where, "series contains NaN or inf"))
        elif nonnegative and np.any(self.values < 0):
            out.append(Violation("NegativeValue", where, "series contains negative samples"))
        return out


@dataclass(frozen=True)
class PVSpec:
    rated_kw: float = 0.43
    panel_area_m2: float = 2.4
    lifespan_years: float = 25
    gamma_pct_per_degC: float = 0.043
    cost_eur_per_kw: float = 1200.0
    stc_irradiance_kw_per_m2: float = 1.0
    stc_temp_degC: float = 25.0
    noct_degC: float = 45.0
    opex_eur_per_kw_year: float = 24.0
    ca_eur_per_kw_year: float = 1.0

    @property
    def panel_cost_eur(self):
        return self.cost_eur_per_kw * self.rated_kw

    @property
    def panel_omca_eur_per_year(self):
        return self.rated_kw * (self.opex_eur_per_kw_year + self.ca_eur_per_kw_year)

    def problems(self, where="pv"):
        out = []
        for name in ("rated_kw", "panel_area_m2", "lifespan_years", "gamma_pct_per_degC",
                     "stc_irradiance_kw_per_m2", "noct_degC"):
            if not getattr(self, name) > 0:
                out.append(Violation("NonPositiveValue", f"{where}.{name}", "must be > 0"))
        for name in ("cost_eur_per_kw", "opex_eur_per_kw_year", "ca_eur_per_kw_year"):
            if not getattr(self, name) >= 0:
                out.append(Violation("NegativeValue", f"{where}.{name}", "must be >= 0"))
        return out


@dataclass(frozen=True)
class BESSSpec:
    capacity_kwh: float = 5.0
    eta_c: float = 0.9
    eta_d: float = 0.9
    p_charge_max_kw: float = 1.25
    p_discharge_max_kw: float = 1.25
    soc_min_kwh: float = 0.5
    soc_max_kwh: float = 4.5
    cost_eur_per_kwh: float = 250.0
    lifespan_years: int = 12
    opex_eur_per_kwh_year: float = 24.0
    ca_eur_per_kwh_year: float = 1.0
    max_units: int = 20

    @property
    def unit_cost_eur(self):
        return self.cost_eur_per_kwh * self.capacity_kwh

    @property
    def unit_omca_eur_per_year(self):
        return self.capacity_kwh * (self.opex_eur_per_kwh_year + self.ca_eur_per_kwh_year)

    def problems(self, where="bess"):
        out = []
        for name in ("eta_c", "eta_d"):
            v = getattr(self, name)
            if not (0 < v <= 1):
                out.append(Violation("SocEfficiencyInvalid", f"{where}.{name}", f"{v} not in (0, 1]"))
        for name in ("p_charge_max_kw", "p_discharge_max_kw", "capacity_kwh"):
            if not getattr(self, name) > 0:
                out.append(Violation("NonPositiveValue", f"{where}.{name}", "must be > 0"))
        if not (0 <= self.soc_min_kwh < self.soc_max_kwh <= self.capacity_kwh):
            out.append(Violation(
                "SocBoundsInverted", f"{where}.soc_min_kwh",
                f"need 0 <= {self.soc_min_kwh} < {self.soc_max_kwh} <= {self.capacity_kwh}",
            ))
        for name in ("cost_eur_per_kwh", "opex_eur_per_kwh_year", "ca_eur_per_kwh_year"):
            if not getattr(self, name) >= 0:
                out.append(Violation("NegativeValue", f"{where}.{name}", "must be >= 0"))
        if not self.lifespan_years >= 1 or int(self.lifespan_years) != self.lifespan_years:
            out.append(Violation("InvalidLifespan", f"{where}.lifespan_years", "positive integer years"))
        if not self.max_units >= 0 or int(self.max_units) != self.max_units:
            out.append(Violation("NegativeValue", f"{where}.max_units", "non-negative integer"))
        return out


@dataclass(frozen=True)
class TariffSchedule:
    buy_eur_per_kwh: dict = field(default_factory=lambda: {"F1": 0.195, "F2": 0.165, "F3": 0.125})
    sell_eur_per_kwh: dict = field(default_factory=lambda: {"F1": 0.075, "F2": 0.055, "F3": 0.035})
    share_eur_per_kwh: float = 0.11
    transmission_eur_per_kwh: float = 0.00822
    holidays: tuple = ()

    def __hash__(self):
        return hash((tuple(sorted(self.buy_eur_per_kwh.items())),
                     tuple(sorted(self.sell_eur_per_kwh.items())),
                     self.share_eur_per_kwh, self.transmission_eur_per_kwh, self.holidays))

    @property
    def incentive_eur_per_kwh(self):
        return self.share_eur_per_kwh + self.transmission_eur_per_kwh

    def problems(self, where="tariff"):
        out = []
        for kind in ("buy_eur_per_kwh", "sell_eur_per_kwh"):
            rates = getattr(self, kind)
            missing = [b for b in BANDS if b not in rates]
            if missing:
                out.append(Violation("MissingBand", f"{where}.{kind}", f"no rate for {missing}"))
            for b, v in rates.items():
                if b not in BANDS:
                    out.append(Violation("UnknownBand", f"{where}.{kind}.{b}", "bands are F1, F2, F3"))
                elif not v >= 0:
                    out.append(Violation("NonPositiveRate", f"{where}.{kind}.{b}", f"{v} < 0"))
        for b in BANDS:
            bu = self.buy_eur_per_kwh.get(b)
            se = self.sell_eur_per_kwh.get(b)
            if bu is not None and se is not None and bu < se:
                out.append(Violation("BuyBelowSell", f"{where}.{b}", f"buy {bu} < sell {se}"))
        for name in ("share_eur_per_kwh", "transmission_eur_per_kwh"):
            if not getattr(self, name) >= 0:
                out.append(Violation("NonPositiveRate", f"{where}.{name}", "must be >= 0"))
        return out


@dataclass(frozen=True)
class EconomicParams:
    discount_rate_per_year: float = 0.03
    horizon_years: int = 25
    season_days: float = 91
    max_payback_years: int = None
    operating_from_year_one: bool = False

    def problems(self, where="economics"):
        out = []
        if not self.discount_rate_per_year >= 0:
            out.append(Violation("NegativeDiscountRate", f"{where}.discount_rate_per_year", "must be >= 0"))
        if not self.horizon_years >= 1 or int(self.horizon_years) != self.horizon_years:
            out.append(Violation("InvalidHorizon", f"{where}.horizon_years", "integer >= 1"))
        if not self.season_days >= 1:
            out.append(Violation("InvalidSeasonDays", f"{where}.season_days", "must be >= 1"))
        if self.max_payback_years is not None and not (0 <= self.max_payback_years <= self.horizon_years):
            out.append(Violation("InvalidPayback", f"{where}.max_payback_years", "must lie in [0, horizon]"))
        return out

    def discount_factors(self):
        y = np.arange(self.horizon_years + 1)
        return (1.0 + self.discount_rate_per_year) ** (-y.astype(float))

    def operating_mask(self):
        m = np.ones(self.horizon_years + 1)
        if self.operating_from_year_one:
            m[0] = 0.0
        return m


@dataclass(frozen=True)
class ParticipantSpec:
    id: str
    roof_area_m2: float
    demand: TimeSeries = None
    annual_bill_eur: float = None
    demand_csv: str = None

    def problems(self, where):
        out = []
        if not self.roof_area_m2 >= 0:
            out.append(Violation("NegativeValue", f"{where}.roof_area_m2", "must be >= 0"))
        if self.annual_bill_eur is not None and not self.annual_bill_eur >= 0:
            out.append(Violation("NegativeValue", f"{where}.annual_bill_eur", "must be >= 0"))
        if self.demand is not None:
            out.extend(self.demand.problems(f"{where}.demand"))
        return out


@dataclass(frozen=True)
class WeatherSeries:
    irradiance: TimeSeries
    ambient: TimeSeries
    irradiance_csv: str = None
    ambient_csv: str = None


@dataclass(frozen=True)
class RECConfig:
    participants: tuple
    pv: PVSpec = field(default_factory=PVSpec)
    bess: BESSSpec = field(default_factory=BESSSpec)
    tariff: TariffSchedule = field(default_factory=TariffSchedule)
    economics: EconomicParams = field(default_factory=EconomicParams)
    weather: WeatherSeries = None

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))

    @property
    def ids(self):
        return [p.id for p in self.participants]

    def participant(self, pid):
        for p in self.participants:
            if p.id == pid:
                return p
        raise KeyError(pid)


def _aligned(a, b):
    return a.start == b.start and a.step_hours == b.step_hours and len(a) == len(b)


def validate_config(raw):
    """Return ``raw`` unchanged if every invariant holds, else raise ConfigError."""
    out = []
    out += raw.pv.problems()
    out += raw.bess.problems()
    out += raw.tariff.problems()
    out += raw.economics.problems()
    if len(raw.participants) < 2:
        out.append(Violation("SingleParticipantREC", "participants",
                             f"a community needs at least two participants, got {len(raw.participants)}"))
    seen = set()
    for k, p in enumerate(raw.participants):
        where = f"participants[{k}]"
        if p.id in seen:
            out.append(Violation("DuplicateParticipant", where, f"id {p.id!r} repeated"))
        seen.add(p.id)
        out += p.problems(where)
    w = raw.weather
    if w is not None:
        out += w.irradiance.problems("weather.irradiance")
        out += w.ambient.problems("weather.ambient", nonnegative=False)
        if not _aligned(w.irradiance, w.ambient):
            out.append(Violation("SeriesLengthMismatch", "weather", "irradiance and ambient are not aligned"))
        for k, p in enumerate(raw.participants):
            if p.demand is not None and not _aligned(p.demand, w.irradiance):
                out.append(Violation("SeriesLengthMismatch", f"participants[{k}].demand",
                                     "demand does not cover the weather span"))
    if out:
        raise ConfigError(out)
    return raw


def with_participants(cfg, participants):
    return replace(cfg, participants=tuple(participants))


def spec_fields(obj):
    """Plain ``name -> value`` mapping of a spec dataclass."""
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


FLOWS = ("self", "sell", "charge", "discharge", "soc", "b_charge", "b_discharge")


@dataclass(frozen=True, eq=False)
class DispatchSolution:
    """Hourly flows over the periodic horizon.

    ``flows[pid][name]`` is an array over ``hours`` for every name in
    :data:`FLOWS`; ``soc`` holds the state at the end of each hour.
    ``shared`` is the community-level shared power.  ``hours`` are the
    interval start timestamps used for tariff band lookup.
    """

    hours: tuple
    flows: dict
    shared: np.ndarray
    generation: dict = None
    demand: dict = None
    step_hours: float = 1.0
    day_hours: int = 24

    @property
    def ids(self):
        return list(self.flows)

    def flow(self, pid, name):
        return self.flows[pid][name]
