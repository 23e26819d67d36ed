from pathlib import Path

import pytest

from recsizer import extraction as ex
from recsizer import io as rio
from recsizer.sizing import assemble, solve_bnb

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def desk_config():
    return rio.load_config(FIXTURES / "desk" / "rec.toml")


@pytest.fixture(scope="session")
def desk_repdays(desk_config):
    w = ex.weather_rep_days(rio.read_weather_csv(FIXTURES / "desk" / "weather.csv"))
    loads = {}
    for p in desk_config.participants:
        model = ex.fit_seasonal(p.demand)
        loads[p.id] = ex.representative_days(model, w[0].dates)
    return loads, w


@pytest.fixture(scope="session")
def desk_problem(desk_config, desk_repdays):
    loads, w = desk_repdays
    return assemble(desk_config, loads, w)


@pytest.fixture(scope="session")
def desk_solution(desk_problem):
    return solve_bnb(desk_problem, gap_tol=1e-4)


@pytest.fixture(scope="session")
def tiny_config():
    return rio.load_config(FIXTURES / "tiny" / "rec.toml")


@pytest.fixture(scope="session")
def tiny_problem(tiny_config):
    loads, w, hod = rio.repdays_from_dict(rio.load_json(FIXTURES / "tiny" / "repdays.json"))
    return assemble(tiny_config, loads, w, hod)


@pytest.fixture(scope="session")
def tiny_solution(tiny_problem):
    return solve_bnb(tiny_problem, gap_tol=0.0)
