import math
from datetime import date, datetime

import numpy as np
import pytest

from recsizer import extraction as ex
from recsizer.core import SEASONS, TimeSeries
from recsizer.synthetic import load_year


def rand_lasso(seed, n=200, m=50):
    r = np.random.default_rng(seed)
    phi = r.standard_normal((n, m))
    y = phi @ (r.standard_normal(m) * (r.random(m) < 0.3)) + 0.5 * r.standard_normal(n)
    return phi, y


def test_soft_threshold_branches():
    assert ex.soft_threshold(2.0, 0.5) == 1.5
    assert ex.soft_threshold(0.3, 0.5) == 0.0
    assert ex.soft_threshold(-2.0, 0.5) == -1.5
    np.testing.assert_array_equal(ex.soft_threshold(np.array([2.0, 0.3, -2.0, 0.5]), 0.5), [1.5, 0, -1.5, 0])
    with pytest.raises(ValueError):
        ex.soft_threshold(1.0, -0.1)


def test_regressor_counts():
    assert ex.build_regressors(10, ex.RegressorSpec(2, 3, 0)).shape == (10, 30)
    assert ex.build_regressors(10, ex.RegressorSpec(1, 1, 0)).shape == (10, 6)
    assert ex.build_regressors(10, ex.RegressorSpec(2, 3, 4)).shape == (10, 38)
    assert ex.RegressorSpec(2, 3, 4).n_columns == 38
    np.testing.assert_array_equal(ex.build_regressors(50)[:, 0], 1.0)


def test_regressors_orthogonal_on_full_period():
    spec = ex.RegressorSpec(2, 3, 4, period_year_h=8 * 168)
    phi = ex.build_regressors(8 * 168, spec)
    g = phi.T @ phi
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) <= 1e-8 * phi.shape[0]


def test_lambda_max_examples():
    phi, y = rand_lasso(0)
    assert ex.lambda_max(phi, np.zeros(200)) == 0.0
    y1 = np.array([1.0, 2.0, 6.0])
    assert ex.lambda_max(np.ones((3, 1)), y1) == pytest.approx(2 * 3.0)
    assert ex.lambda_max(phi, -3 * y) == pytest.approx(3 * ex.lambda_max(phi, y))


def test_zero_at_and_above_lambda_max():
    phi, y = rand_lasso(1)
    lm = ex.lambda_max(phi, y)
    for lam in (lm, 1.5 * lm):
        assert np.all(ex.fista(phi, y, lam).theta == 0.0)
        assert np.all(ex.lasso_cd(phi, y, lam) == 0.0)
    assert np.any(ex.fista(phi, y, 0.9 * lm).theta != 0.0)


def test_zero_lambda_solves_square_system():
    r = np.random.default_rng(3)
    phi = np.eye(12) + 0.1 * r.standard_normal((12, 12))
    y = r.standard_normal(12)
    # the displacement rule bounds the step, not the error; tighten it for a 1e-8 answer
    res = ex.fista(phi, y, 0.0, tol=1e-12)
    assert res.converged
    np.testing.assert_allclose(res.theta, np.linalg.solve(phi, y), atol=1e-8)


def test_orthonormal_design_closed_form():
    r = np.random.default_rng(4)
    q, _ = np.linalg.qr(r.standard_normal((100, 20)))
    y = r.standard_normal(100)
    lam = 0.004
    b = q.T @ y
    closed = np.sign(b) * np.maximum(np.abs(b) - 100 * lam / 2, 0.0)
    np.testing.assert_allclose(ex.fista(q, y, lam).theta, closed, atol=1e-8)
    np.testing.assert_allclose(ex.lasso_cd(q, y, lam), closed, atol=1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_fista_matches_coordinate_descent(seed):
    phi, y = rand_lasso(100 + seed)
    lam = 0.05 * ex.lambda_max(phi, y)
    f = ex.fista(phi, y, lam)
    oracle = ex.lasso_cd(phi, y, lam, tol=1e-12)
    assert f.converged
    assert abs(f.objective - ex.lasso_objective(phi, y, oracle, lam)) <= 1e-8


def test_fista_beats_zero_and_least_squares():
    phi, y = rand_lasso(7)
    lam = 0.1 * ex.lambda_max(phi, y)
    f = ex.fista(phi, y, lam).objective
    ls = np.linalg.lstsq(phi, y, rcond=None)[0]
    assert f <= ex.lasso_objective(phi, y, np.zeros(50), lam)
    assert f <= ex.lasso_objective(phi, y, ls, lam) + 1e-12


def test_printed_order_reaches_same_objective():
    phi, y = rand_lasso(8, n=120, m=30)
    lam = 0.1 * ex.lambda_max(phi, y)
    a = ex.fista(phi, y, lam)
    b = ex.fista(phi, y, lam, order="printed", max_iter=3000)
    assert abs(a.objective - b.objective) <= 1e-8


def test_max_iter_flags_not_converged():
    phi, y = rand_lasso(9)
    res = ex.fista(phi, y, 0.01, max_iter=3)
    assert not res.converged and res.iterations == 3


def test_log_detrend_constant():
    y, trend = ex.log_detrend(TimeSeries(datetime(2023, 1, 1), np.full(500, 2.5)))
    np.testing.assert_allclose(y, 0.0, atol=1e-12)
    np.testing.assert_allclose(trend, math.log(2.5), atol=1e-12)


def test_log_detrend_exponential_ramp():
    n = 3 * 8760
    t = np.arange(n, dtype=float)
    y, trend = ex.log_detrend(TimeSeries(datetime(2020, 1, 1), np.exp(0.001 * t)))
    full = slice(8760, 2 * 8760)  # where the whole two-year window fits
    assert np.max(np.abs(trend[full] - 0.001 * t[full]) / (0.001 * t[full])) < 0.05


def test_log_detrend_daily_sinusoid():
    n = 8760
    s = 0.3 * np.sin(2 * math.pi * np.arange(n) / 24)
    y, trend = ex.log_detrend(TimeSeries(datetime(2023, 1, 1), np.exp(1.0 + s)))
    mid = slice(n // 4, 3 * n // 4)
    np.testing.assert_allclose(trend[mid], 1.0, atol=1e-3)
    np.testing.assert_allclose(y[mid], s[mid], atol=1e-3)


def test_one_year_trend_is_flat():
    z = load_year(seed=1)
    _, trend = ex.log_detrend(z)
    np.testing.assert_allclose(trend, np.log(z.values).mean(), rtol=1e-12)
    _, shrunk = ex.log_detrend(z, edges="shrink")
    assert np.ptp(shrunk) > 0.1


def test_log_detrend_floors_zeros():
    y, trend = ex.log_detrend(np.array([0.0, 1.0, 1.0]))
    assert np.all(np.isfinite(y))


def test_insufficient_data():
    with pytest.raises(ex.InsufficientData):
        ex.fit_seasonal(TimeSeries(datetime(2023, 1, 1), np.ones(8000)))
    short = TimeSeries(datetime(2023, 1, 1), np.ones(100))
    with pytest.raises(ex.InsufficientData):
        ex.weather_rep_days((short, short))


def test_representative_dates_are_wednesdays_near_midpoints():
    d = ex.representative_dates(date(2023, 1, 1))
    assert {s: v.weekday() for s, v in d.items()} == {s: 2 for s in SEASONS}
    mids = {"winter": date(2023, 2, 15), "spring": date(2023, 5, 15),
            "summer": date(2023, 8, 15), "fall": date(2023, 11, 15)}
    for s in SEASONS:
        assert abs((d[s] - mids[s]).days) <= 3


def test_flat_model_gives_flat_days():
    spec = ex.RegressorSpec()
    model = ex.SeasonalModel(np.zeros(spec.n_columns), spec, math.log(1.7), 0.0, datetime(2023, 1, 1))
    rd = ex.representative_days(model)
    for s in SEASONS:
        np.testing.assert_allclose(rd.profiles[s], 1.7, rtol=1e-14)


def test_fitted_days_track_generator():
    noisy = load_year(seed=3, noise=0.05)
    clean = load_year(seed=3, noise=0.0)
    model = ex.fit_seasonal(noisy)
    rd = ex.representative_days(model)
    for s in SEASONS:
        d = rd.dates[s]
        k = (datetime(d.year, d.month, d.day) - clean.start).days * 24
        truth = clean.values[k:k + 24]
        rel_rmse = np.sqrt(np.mean((rd.profiles[s] - truth) ** 2)) / np.mean(truth)
        assert rel_rmse < 0.10, s
        assert np.all(rd.profiles[s] > 0)


def _monthly_sky(amp):
    start = datetime(2023, 1, 1)
    n = 8760
    shape = np.clip(np.sin(math.pi * (np.arange(24) - 6) / 12), 0, None)
    vals = np.empty(n)
    ts = TimeSeries(start, np.zeros(n)).timestamps()
    for k, t in enumerate(ts):
        vals[k] = amp[t.month] * shape[t.hour]
    return TimeSeries(start, vals), shape


def test_weather_days_constant_and_nights():
    irr = TimeSeries(datetime(2023, 1, 1), np.full(8760, 0.5))
    amb = TimeSeries(datetime(2023, 1, 1), np.full(8760, 12.0))
    wi, wa = ex.weather_rep_days((irr, amb))
    for s in SEASONS:
        np.testing.assert_allclose(wi.profiles[s], 0.5)
        np.testing.assert_allclose(wa.profiles[s], 12.0)
    sky, shape = _monthly_sky({m: 0.6 for m in range(1, 13)})
    wi, _ = ex.weather_rep_days((sky, amb))
    for s in SEASONS:
        assert np.all(wi.profiles[s][shape == 0] == 0.0)


def test_weather_days_recover_seasonal_amplitude():
    amp = {m: 0.5 + 0.3 * math.cos(2 * math.pi * (m - 7) / 12) for m in range(1, 13)}
    sky, shape = _monthly_sky(amp)
    amb = TimeSeries(sky.start, np.zeros(8760))
    wi, _ = ex.weather_rep_days((sky, amb))
    days = {m: (date(2023 + (m == 12), 1 if m == 12 else m + 1, 1) - date(2023, m, 1)).days for m in range(1, 13)}
    for s, months in ex.SEASON_MONTHS.items():
        expect = sum(amp[m] * days[m] for m in months) / sum(days[m] for m in months)
        peak = wi.profiles[s].max() / shape.max()
        assert abs(peak - expect) / expect < 0.05
