"""Poisson log-linear baseline: harmonic + weekday design, fit by IRLS."""
from __future__ import annotations

import datetime as dt
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import DataError, DegenerateResponse, NotConvergedWarning, Overflow, SingularDesign
from .series import CountSeries

FORMAT_TAG = "mlrss-baseline"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class DesignSpec:
    """Column layout of the baseline design matrix.

    Columns, in order: intercept (optional), weekday flag, then a sin/cos
    pair per harmonic frequency, then weekday-interacted sin/cos pairs per
    interaction frequency. Frequencies are in periods per ``period_days``.
    """

    harmonic_frequencies: tuple[int, ...] = (1, 2, 4, 8, 16)
    interaction_frequencies: tuple[int, ...] = (1, 2)
    include_intercept: bool = True
    period_days: float = 365.25
    epoch: dt.date = dt.date(2000, 1, 1)

    def __post_init__(self):
        object.__setattr__(self, "harmonic_frequencies", tuple(int(k) for k in self.harmonic_frequencies))
        object.__setattr__(self, "interaction_frequencies", tuple(int(k) for k in self.interaction_frequencies))
        if isinstance(self.epoch, str):
            object.__setattr__(self, "epoch", dt.date.fromisoformat(self.epoch))
        if not set(self.interaction_frequencies) <= set(self.harmonic_frequencies):
            raise ValueError("interaction frequencies must be a subset of harmonic frequencies")
        if self.period_days <= 0:
            raise ValueError("period_days must be positive")

    @property
    def n_columns(self) -> int:
        return (int(self.include_intercept) + 1 + 2 * len(self.harmonic_frequencies)
                + 2 * len(self.interaction_frequencies))

    @property
    def column_names(self) -> list[str]:
        names = ["intercept"] if self.include_intercept else []
        names.append("weekday")
        for k in self.harmonic_frequencies:
            names += [f"sin{k}", f"cos{k}"]
        for k in self.interaction_frequencies:
            names += [f"weekday:sin{k}", f"weekday:cos{k}"]
        return names

    def to_dict(self) -> dict:
        return {
            "harmonic_frequencies": list(self.harmonic_frequencies),
            "interaction_frequencies": list(self.interaction_frequencies),
            "include_intercept": self.include_intercept,
            "period_days": self.period_days,
            "epoch": self.epoch.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpec":
        d = dict(d)
        if "epoch" in d and isinstance(d["epoch"], str):
            d["epoch"] = dt.date.fromisoformat(d["epoch"])
        return cls(**d)


CONTEST_SPEC = DesignSpec()


@dataclass(frozen=True)
class CalendarDay:
    t: int
    weekday: bool
    fraction: float


def calendar_day(t: int, date: dt.date, spec: DesignSpec) -> CalendarDay:
    weekday, frac = _calendar([date], spec)
    return CalendarDay(int(t), bool(weekday[0]), float(frac[0]))


def calendar_days(series: CountSeries, spec: DesignSpec) -> list[CalendarDay]:
    weekday, frac = _calendar(series.dates, spec)
    return [CalendarDay(int(t), bool(w), float(f)) for t, w, f in zip(series.days, weekday, frac)]


def _calendar(dates: Sequence[dt.date], spec: DesignSpec):
    # Saturday/Sunday are weekend; fraction is phase within the period since the epoch.
    weekday = np.array([d.weekday() < 5 for d in dates], dtype=bool)
    offset = np.array([(d - spec.epoch).days for d in dates], dtype=float)
    frac = np.mod(offset / spec.period_days, 1.0)
    return weekday, frac


def design_matrix(weekday, fraction, spec: DesignSpec) -> np.ndarray:
    weekday = np.asarray(weekday, dtype=float)
    fraction = np.asarray(fraction, dtype=float)
    cols = []
    if spec.include_intercept:
        cols.append(np.ones_like(fraction))
    cols.append(weekday)
    for k in spec.harmonic_frequencies:
        angle = 2.0 * np.pi * k * fraction
        cols += [np.sin(angle), np.cos(angle)]
    for k in spec.interaction_frequencies:
        angle = 2.0 * np.pi * k * fraction
        cols += [weekday * np.sin(angle), weekday * np.cos(angle)]
    return np.column_stack(cols)


def build_design_row(day: CalendarDay, spec: DesignSpec) -> np.ndarray:
    return design_matrix([day.weekday], [day.fraction], spec)[0]


def series_design(series: CountSeries, spec: DesignSpec) -> np.ndarray:
    return design_matrix(*_calendar(series.dates, spec), spec)


def days_design(days: Sequence[CalendarDay], spec: DesignSpec) -> np.ndarray:
    return design_matrix([d.weekday for d in days], [d.fraction for d in days], spec)


@dataclass(frozen=True)
class BaselineModel:
    beta: np.ndarray
    spec: DesignSpec
    fit_deviance: float = float("nan")
    converged: bool = True
    n_iter: int = 0
    deviance_history: tuple[float, ...] = ()
    fitted: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.spec.n_columns,):
            raise ValueError(f"beta has {beta.size} entries, design has {self.spec.n_columns} columns")
        object.__setattr__(self, "beta", beta)

    def lambdas(self, series: CountSeries) -> np.ndarray:
        return _exp_mean(series_design(series, self.spec) @ self.beta)

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_TAG,
            "version": FORMAT_VERSION,
            "spec": self.spec.to_dict(),
            "columns": self.spec.column_names,
            "beta": [float(b) for b in self.beta],
            "fit_deviance": float(self.fit_deviance),
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BaselineModel":
        if d.get("format") != FORMAT_TAG or d.get("version") != FORMAT_VERSION:
            raise DataError(f"not a {FORMAT_TAG} v{FORMAT_VERSION} document")
        spec = DesignSpec.from_dict(d["spec"])
        if list(d["columns"]) != spec.column_names:
            raise DataError("column names do not match the design spec")
        return cls(np.array(d["beta"], dtype=float), spec, d.get("fit_deviance", float("nan")),
                   d.get("converged", True), d.get("n_iter", 0))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "BaselineModel":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (KeyError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: malformed baseline file") from exc


def _exp_mean(eta) -> np.ndarray:
    with np.errstate(over="ignore"):
        lam = np.exp(eta)
    if not np.all(np.isfinite(lam)):
        raise Overflow("baseline mean is not finite")
    return lam


def predict_lambda(model: BaselineModel, days: Sequence[CalendarDay]) -> np.ndarray:
    return _exp_mean(days_design(days, model.spec) @ model.beta)


def poisson_deviance(y, mu) -> float:
    y = np.asarray(y, dtype=float)
    ylogy = np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0)
    return float(2.0 * np.sum(ylogy - (y - mu)))


def _weighted_solve(X, z, w):
    sw = np.sqrt(w)
    A = X * sw[:, None]
    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[-1] <= diag[0] * max(A.shape) * np.finfo(float).eps:
        raise SingularDesign(f"design has rank < {X.shape[1]} under the working weights")
    coef = linalg.solve_triangular(R, Q.T @ (sw * z))
    beta = np.empty_like(coef)
    beta[piv] = coef
    return beta


def fit_poisson_irls(X, y, *, intercept_col: int | None = 0, tol: float = 1e-8,
                     max_iter: int = 100, max_halvings: int = 30):
    """Poisson GLM with log link by iteratively reweighted least squares.

    Each Newton step that would raise the deviance is halved back toward the
    previous iterate, so the deviance history is non-increasing.

    Returns:
        (beta, deviance_history, converged, mu)
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise DataError("counts must be nonnegative")
    if y.sum() == 0:
        raise DegenerateResponse("all counts are zero; the Poisson MLE does not exist")

    beta = np.zeros(X.shape[1])
    if intercept_col is not None:
        beta[intercept_col] = np.log(y.mean() + 0.5)
    mu = np.exp(X @ beta)
    dev = poisson_deviance(y, mu)
    history = [dev]
    converged = False
    for _ in range(max_iter):
        eta = X @ beta
        z = eta + (y - mu) / mu
        proposal = _weighted_solve(X, z, mu)
        step = proposal - beta
        for _ in range(max_halvings + 1):
            cand = beta + step
            with np.errstate(over="ignore"):
                mu_c = np.exp(X @ cand)
            dev_c = poisson_deviance(y, mu_c) if np.all(np.isfinite(mu_c)) else np.inf
            if dev_c <= dev:
                break
            step = step / 2.0
        else:
            # no descent possible along the Newton direction: at a stationary point
            converged = True
            break
        beta, mu = cand, mu_c
        change = abs(dev - dev_c) / (abs(dev_c) + 0.1)
        dev = dev_c
        history.append(dev)
        if change < tol:
            converged = True
            break
    return beta, history, converged, mu


def fit_baseline(series: CountSeries, spec: DesignSpec = CONTEST_SPEC, *, mask=None,
                 tol: float = 1e-8, max_iter: int = 100) -> BaselineModel:
    """Fit the baseline on ``series``, optionally only on days where ``mask`` is true."""
    X = series_design(series, spec)
    y = series.counts
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        X, y = X[mask], y[mask]
    if y.size < 2 * spec.n_columns:
        raise DataError(f"need at least {2 * spec.n_columns} days to fit {spec.n_columns} columns")
    beta, history, converged, _ = fit_poisson_irls(
        X, y, intercept_col=0 if spec.include_intercept else None, tol=tol, max_iter=max_iter)
    if not converged:
        warnings.warn(f"IRLS did not converge in {max_iter} iterations", NotConvergedWarning)
    fitted = _exp_mean(X @ beta)
    return BaselineModel(beta, spec, history[-1], converged, len(history) - 1,
                         tuple(history), fitted)
