from dataclasses import replace
from datetime import datetime

import numpy as np
import pytest

from recsizer import io as rio
from recsizer.core import (BESSSpec, ConfigError, EconomicParams, ParticipantSpec, RECConfig,
                           TariffSchedule, TimeSeries)
from recsizer.synthetic import write_tiny_fixture


def sample_config():
    parts = (ParticipantSpec("a", 12.5, annual_bill_eur=800.0), ParticipantSpec("b", 0.0))
    return RECConfig(parts, bess=replace(BESSSpec(), max_units=3),
                     tariff=TariffSchedule(holidays=("2023-12-25",)),
                     economics=EconomicParams(discount_rate_per_year=0.05, max_payback_years=15))


def test_config_round_trip_is_identity():
    cfg = sample_config()
    back = rio.loads_config(rio.dumps_config(cfg), load_series=False)
    assert back == cfg


def test_serialization_idempotent():
    text = rio.dumps_config(sample_config())
    assert rio.dumps_config(rio.loads_config(text, load_series=False)) == text


def test_unit_bearing_keys():
    text = rio.dumps_config(sample_config())
    for key in ("rated_kw", "cost_eur_per_kw", "capacity_kwh", "discount_rate_per_year", "roof_area_m2"):
        assert key in text


def test_discount_rate_is_mandatory():
    text = rio.dumps_config(sample_config()).replace("discount_rate_per_year = 0.05\n", "")
    with pytest.raises(ConfigError) as err:
        rio.loads_config(text, load_series=False)
    assert "MissingField" in err.value.codes


def test_unknown_keys_and_version_reported_together():
    text = rio.dumps_config(sample_config()).replace("schema_version = 1", "schema_version = 7")
    text = text.replace("[pv]\n", "[pv]\nwattage = 3\n")
    with pytest.raises(ConfigError) as err:
        rio.loads_config(text, load_series=False)
    assert {"SchemaVersion", "UnknownKey"} <= set(err.value.codes)


def test_series_csv_round_trip(tmp_path):
    ts = TimeSeries(datetime(2023, 3, 1), np.array([0.1, 2.5, 1e-7, 3.0]))
    rio.write_series_csv(tmp_path / "s.csv", ts)
    assert rio.read_series_csv(tmp_path / "s.csv") == ts


@pytest.mark.parametrize("body", [
    "time,value\n2023-01-01T00:00:00,1\n",
    "timestamp,value\n2023-01-01T00:00:00,1\n2023-01-01T01:00:00,x\n",
    "timestamp,value\n2023-01-01T00:00:00,1\n2023-01-01T01:00:00,1\n2023-01-01T03:00:00,1\n",
    "timestamp,value\n",
])
def test_bad_csv_rejected(tmp_path, body):
    (tmp_path / "bad.csv").write_text(body)
    with pytest.raises(rio.SchemaError):
        rio.read_series_csv(tmp_path / "bad.csv")


def test_weather_csv_round_trip(tmp_path):
    irr = TimeSeries(datetime(2023, 1, 1), [0.0, 0.4, 0.9])
    amb = TimeSeries(datetime(2023, 1, 1), [-2.0, 5.5, 11.0])
    rio.write_weather_csv(tmp_path / "w.csv", irr, amb)
    a, b = rio.read_weather_csv(tmp_path / "w.csv")
    assert a == irr and b == amb


def test_config_hash_ignores_file_locations():
    cfg = sample_config()
    moved = replace(cfg, participants=tuple(replace(p, demand_csv="elsewhere.csv") for p in cfg.participants))
    assert rio.config_hash(cfg) == rio.config_hash(moved)
    other = replace(cfg, economics=replace(cfg.economics, discount_rate_per_year=0.04))
    assert rio.config_hash(cfg) != rio.config_hash(other)


def test_repdays_round_trip(tmp_path):
    write_tiny_fixture(tmp_path)
    raw = rio.load_json(tmp_path / "repdays.json")
    loads, weather, hod = rio.repdays_from_dict(raw)
    again = rio.repdays_to_dict(loads, weather, hod)
    assert again == raw


def test_repdays_wrong_length_rejected(tmp_path):
    write_tiny_fixture(tmp_path)
    raw = rio.load_json(tmp_path / "repdays.json")
    raw["participants"]["a"]["profiles_kw"]["summer"].append(1.0)
    with pytest.raises(rio.SchemaError):
        rio.repdays_from_dict(raw)
