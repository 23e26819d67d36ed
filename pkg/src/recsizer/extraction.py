"""Representative seasonal days from a year of hourly data.

Load is log-transformed and detrended, the residual is regressed on a
yearly x weekly Fourier tensor basis (plus daily harmonics) with an l1
penalty solved by FISTA, and the fitted profile is read back on one
calendar day per season.
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta

import numpy as np

from . import _kernels as K
from .core import SEASONS, DomainError, SeriesLengthMismatch

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
SEASON_MIDPOINTS = {"winter": (2, 15), "spring": (5, 15), "summer": (8, 15), "fall": (11, 15)}
SEASON_MONTHS = {"winter": (12, 1, 2), "spring": (3, 4, 5), "summer": (6, 7, 8), "fall": (9, 10, 11)}


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class RegressorSpec:
    n_yearly: int = 2
    n_weekly: int = 3
    n_daily: int = 4
    period_year_h: float = 8760.0
    period_week_h: float = 168.0
    period_day_h: float = 24.0

    @property
    def n_columns(self):
        return 2 * self.n_weekly * (1 + 2 * self.n_yearly) + 2 * self.n_daily


@dataclass(frozen=True, eq=False)
class SeasonalModel:
    theta: np.ndarray
    spec: RegressorSpec
    trend_level: float
    lam: float
    start: datetime = None
    step_hours: float = 1.0
    converged: bool = True

    def profile(self, t_hours):
        phi = regressors_at(np.asarray(t_hours, dtype=float), self.spec)
        return np.exp(self.trend_level + phi @ self.theta)


@dataclass(frozen=True)
class RepresentativeDays:
    profiles: dict
    dates: dict = field(default_factory=dict)

    def stacked(self):
        """Seasons concatenated in winter, spring, summer, fall order."""
        return np.concatenate([np.asarray(self.profiles[s], dtype=float) for s in SEASONS])


@dataclass
class FistaResult:
    theta: np.ndarray
    iterations: int
    converged: bool
    objective: float


# ---------------------------------------------------------------------------
# preprocessing


def moving_average(x, window, edges="truncate"):
    """Centred moving average over ``window`` samples.

    Near the ends the window either loses the part that falls outside the
    series (``"truncate"``) or shrinks symmetrically to an odd length no
    larger than ``min(window, n)`` (``"shrink"``).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    i = np.arange(n)
    c = np.concatenate([[0.0], np.cumsum(x)])
    if edges == "shrink":
        half = (min(window, n) - 1) // 2
        h = np.minimum(half, np.minimum(i, n - 1 - i))
        return (c[i + h + 1] - c[i - h]) / (2 * h + 1)
    if edges != "truncate":
        raise ValueError(f"unknown edge mode {edges!r}")
    half = (window - 1) // 2
    lo = np.maximum(i - half, 0)
    hi = np.minimum(i + half, n - 1)
    return (c[hi + 1] - c[lo]) / (hi - lo + 1)


def log_detrend(load, eps=1e-3, window_days=731, edges="truncate"):
    """Return ``(y, trend)`` with ``y = ln L - trend``.

    Samples below ``eps`` are floored before the log.
    """
    vals = np.asarray(getattr(load, "values", load), dtype=float)
    step = getattr(load, "step_hours", 1.0)
    if not np.all(np.isfinite(vals)):
        raise DomainError("load contains non-finite samples")
    if eps <= 0 and np.any(vals <= 0):
        raise DomainError("load must be strictly positive")
    z = np.log(np.maximum(vals, eps) if eps > 0 else vals)
    window = int(round(window_days * 24 / step))
    trend = moving_average(z, window, edges)
    return z - trend, trend


# ---------------------------------------------------------------------------
# regressors


def regressors_at(t, spec):
    """Regressor matrix evaluated at times ``t`` (hours from the origin)."""
    t = np.asarray(t, dtype=float)
    psi = 2 * math.pi / spec.period_year_h
    omega = 2 * math.pi / spec.period_week_h
    yearly = [np.cos(j * psi * t) for j in range(spec.n_yearly + 1)]
    yearly += [np.sin(j * psi * t) for j in range(1, spec.n_yearly + 1)]
    weekly = [np.cos(k * omega * t) for k in range(spec.n_weekly + 1)]
    weekly += [np.sin(k * omega * t) for k in range(1, spec.n_weekly)]
    cols = [a * b for a in yearly for b in weekly]
    delta = 2 * math.pi / spec.period_day_h
    for l in range(1, spec.n_daily + 1):
        cols.append(np.cos(l * delta * t))
        cols.append(np.sin(l * delta * t))
    return np.column_stack(cols) if cols else np.zeros((t.size, 0))


def build_regressors(n_samples, spec=RegressorSpec(), step_hours=1.0):
    if spec.n_yearly < 1 or spec.n_weekly < 1:
        raise ValueError("need at least one yearly and one weekly harmonic")
    return regressors_at(np.arange(n_samples) * step_hours, spec)


# ---------------------------------------------------------------------------
# LASSO


def lasso_objective(phi, y, theta, lam):
    r = phi @ theta - y
    return float(r @ r) / y.size + lam * float(np.abs(theta).sum())


def lambda_max(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return 0.0
    return 2.0 / y.size * float(np.max(np.abs(phi.T @ y), initial=0.0))


def soft_threshold(x, tau):
    if tau < 0:
        raise ValueError("threshold must be non-negative")
    if np.ndim(x) == 0:
        return float(K.soft_threshold(np.array([x], dtype=float), tau)[0])
    return K.soft_threshold(x, tau)


def lipschitz(phi, iters=200, tol=1e-10, seed=0):
    """``(2/n) sigma_max(phi)^2`` by power iteration on ``phi.T phi``."""
    n, m = phi.shape
    if m == 0 or n == 0:
        return 0.0
    v = np.random.default_rng(seed).standard_normal(m)
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = phi.T @ (phi @ v)
        s_new = float(np.linalg.norm(w))
        if s_new == 0.0:
            return 0.0
        v = w / s_new
        if abs(s_new - s) <= tol * s_new:
            s = s_new
            break
        s = s_new
    # a hair of slack keeps the step safely below 1/L
    return 2.0 / n * s * (1.0 + 1e-9)


def fista(phi, y, lam, tol=1e-8, max_iter=50_000, order="canonical", theta0=None):
    """Minimise ``(1/n)||phi theta - y||^2 + lam ||theta||_1``.

    ``order="canonical"`` takes the prox right after the gradient step and
    extrapolates afterwards.  ``order="printed"`` takes the gradient step,
    adds the momentum term built from the two previous iterates, and only
    then applies the prox.
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if order not in ("canonical", "printed"):
        raise ValueError(f"unknown order {order!r}")
    n, m = phi.shape
    L = lipschitz(phi)
    theta = np.zeros(m) if theta0 is None else np.array(theta0, dtype=float)
    if L == 0.0:
        return FistaResult(np.zeros(m), 0, True, lasso_objective(phi, y, np.zeros(m), lam))
    g = 1.0 / L
    thr = g * lam
    prev = theta.copy()
    z = theta.copy()
    t = 1.0
    converged = False
    k = 0
    while k < max_iter:
        k += 1
        if order == "canonical":
            grad = 2.0 / n * (phi.T @ (phi @ z - y))
            new = K.soft_threshold(z - g * grad, thr)
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            z = new + ((t - 1.0) / t_next) * (new - theta)
        else:
            grad = 2.0 / n * (phi.T @ (phi @ theta - y))
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            step = theta - g * grad + ((t - 1.0) / t_next) * (theta - prev)
            new = K.soft_threshold(step, thr)
        t = t_next
        moved = float(np.linalg.norm(new - theta))
        prev, theta = theta, new
        if moved <= tol:
            converged = True
            break
    if not converged:
        log.warning("FISTA stopped after %d iterations without meeting tol=%g", k, tol)
    return FistaResult(theta, k, converged, lasso_objective(phi, y, theta, lam))


def lasso_cd(phi, y, lam, tol=1e-12, max_sweeps=200_000):
    """Coordinate-descent reference solver for the same objective."""
    phi = np.asfortranarray(phi, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    theta = np.zeros(phi.shape[1])
    col_sq = np.ascontiguousarray((phi * phi).sum(axis=0))
    K.lasso_cd(phi, y, float(lam), theta, col_sq, int(max_sweeps), float(tol))
    return theta


def select_lambda_cv(phi, y, folds=5, grid=20, tol=1e-6):
    """Blocked k-fold choice of lambda over a log grid below lambda_max."""
    lmax = lambda_max(phi, y)
    if lmax == 0.0:
        return 0.0
    lams = lmax * np.logspace(-4, 0, grid)
    n = y.size
    edges = np.linspace(0, n, folds + 1).astype(int)
    scores = np.zeros(grid)
    for f in range(folds):
        test = np.zeros(n, dtype=bool)
        test[edges[f]:edges[f + 1]] = True
        for i, lam in enumerate(lams):
            th = fista(phi[~test], y[~test], lam, tol=tol, max_iter=5000).theta
            r = phi[test] @ th - y[test]
            scores[i] += float(r @ r)
    return float(lams[int(np.argmin(scores))])


# ---------------------------------------------------------------------------
# representative days


def _nearest_weekday(d, weekday=2):
    off = (weekday - d.weekday()) % 7
    if off > 3:
        off -= 7
    return d + timedelta(days=off)


def representative_dates(start):
    """Wednesday nearest each season midpoint, first occurrence at or after ``start``."""
    start_d = start.date() if isinstance(start, datetime) else start
    out = {}
    for s in SEASONS:
        mo, dd = SEASON_MIDPOINTS[s]
        cand = _nearest_weekday(date(start_d.year, mo, dd))
        if cand < start_d:
            cand = _nearest_weekday(date(start_d.year + 1, mo, dd))
        out[s] = cand
    return out


def fit_seasonal(load, spec=RegressorSpec(), lam="auto", eps=1e-3, tol=1e-8,
                 max_iter=50_000, order="canonical"):
    vals = getattr(load, "values", load)
    step = getattr(load, "step_hours", 1.0)
    if len(vals) * step < HOURS_PER_YEAR:
        raise InsufficientData(f"need at least one year of data, got {len(vals) * step:.0f} h")
    y, trend = log_detrend(load, eps=eps)
    phi = build_regressors(y.size, spec, step)
    if lam == "auto":
        lam = 0.1 * lambda_max(phi, y)
    elif lam == "cv":
        lam = select_lambda_cv(phi, y)
    res = fista(phi, y, float(lam), tol=tol, max_iter=max_iter, order=order)
    return SeasonalModel(res.theta, spec, float(np.mean(trend)), float(lam),
                         getattr(load, "start", None), step, res.converged)


def representative_days(model, dates=None):
    start = model.start or datetime(2000, 1, 1)
    dates = dates or representative_dates(start)
    profiles = {}
    for s in SEASONS:
        d = dates[s]
        t0 = (datetime(d.year, d.month, d.day) - start).total_seconds() / 3600.0
        profiles[s] = model.profile(t0 + np.arange(24.0))
    return RepresentativeDays(profiles, dict(dates))


def season_of(month):
    for s, months in SEASON_MONTHS.items():
        if month in months:
            return s
    raise ValueError(month)


def _season_hour_means(series):
    vals = np.asarray(series.values, dtype=float)
    stamps = series.timestamps()
    sums = {s: np.zeros(24) for s in SEASONS}
    counts = {s: np.zeros(24) for s in SEASONS}
    for ts, v in zip(stamps, vals):
        s = season_of(ts.month)
        sums[s][ts.hour] += v
        counts[s][ts.hour] += 1
    out = {}
    for s in SEASONS:
        c = counts[s]
        if np.any(c == 0):
            raise InsufficientData(f"no samples for some hours of {s}")
        out[s] = sums[s] / c
    return out


def weather_rep_days(weather, dates=None):
    irr, amb = weather
    if len(irr) != len(amb) or irr.start != amb.start or irr.step_hours != amb.step_hours:
        raise SeriesLengthMismatch("irradiance and ambient series are not aligned")
    if irr.span_hours < HOURS_PER_YEAR:
        raise InsufficientData(f"need at least one year of weather, got {irr.span_hours:.0f} h")
    dates = dates or representative_dates(irr.start)
    return (RepresentativeDays(_season_hour_means(irr), dict(dates)),
            RepresentativeDays(_season_hour_means(amb), dict(dates)))
