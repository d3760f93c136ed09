"""Mixture likelihood ratio scan statistic.

For a candidate start ``t_o`` and shape ``theta`` the log likelihood ratio
of outbreak versus baseline over days ``t_o..t`` is

    log LR = sum_s [ -delta_s + o_s * log(1 + delta_s / lambda_s) ]

The mixture over a bank of ``n`` shapes is ``log(mean_j LR_j)``, computed
with log-sum-exp. The scan statistic ``log R_t`` is the largest mixture
value over the adaptive window of starts ``{min(t*, t - min_window), ...,
t - 1}``, where ``t*`` is the previous day's best start. The alarm score
is the least-squares slope of the last ``S + 1`` values of ``R``.

The streaming detector keeps, for each (start, shape) pair, the running
sum of daily terms plus the day with the largest standardized residual.
Single-pass outlier remediation only ever replaces that one day, so the
remediated log LR is available in O(1) per pair and day. Iterative
remediation falls back to full recomputation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .baseline import BaselineModel, CalendarDay, build_design_row
from .errors import OutOfOrderDay, Overflow
from .profiles import ProfileBank, ProfileShape

SCORE_SCALES = ("linear", "log")


@dataclass(frozen=True)
class DetectorConfig:
    """Detector settings.

    Attributes:
        S: slope window; the score uses the last ``S + 1`` scan values.
        min_window: the start window always reaches back at least this far.
        gamma: standardized-residual threshold for outlier remediation.
        score_scale: ``"linear"`` takes the slope of ``R``, ``"log"`` of ``log R``.
        log_cap: ``log R`` is capped here before exponentiating.
        max_lookback: if set, starts older than ``t - max_lookback`` leave the window.
    """

    bank: ProfileBank
    baseline: BaselineModel | None = None
    S: int = 10
    min_window: int = 10
    gamma: float = 23.0
    remediation: bool = True
    iterative_remediation: bool = False
    score_scale: str = "linear"
    log_cap: float = 700.0
    max_lookback: int | None = None

    def __post_init__(self):
        if self.S < 1 or self.min_window < 1 or not self.gamma > 0:
            raise ValueError("need S >= 1, min_window >= 1 and gamma > 0")
        if self.score_scale not in SCORE_SCALES:
            raise ValueError(f"score_scale must be one of {SCORE_SCALES}")
        if self.max_lookback is not None and self.max_lookback < self.min_window:
            raise ValueError("max_lookback must be at least min_window")


def daily_terms(counts, lambdas, deltas) -> np.ndarray:
    """Per-day log likelihood ratio terms ``-delta + o * log1p(delta / lambda)``."""
    counts = np.asarray(counts, dtype=float)
    return -deltas + counts * np.log1p(deltas / lambdas)


def _span_deltas(shape: ProfileShape, n: int) -> np.ndarray:
    return shape.curve(np.arange(1, n + 1))


def log_lr(counts, lambdas, shape: ProfileShape) -> float:
    """Log likelihood ratio for an outbreak starting on the first day of ``counts``."""
    lambdas = np.asarray(lambdas, dtype=float)
    return float(np.sum(daily_terms(counts, lambdas, _span_deltas(shape, lambdas.size))))


def _round_half_up(x):
    return np.floor(np.asarray(x) + 0.5)


def remediate(counts, lambdas, shape: ProfileShape, gamma: float = 23.0, *,
              iterative: bool = False) -> tuple[np.ndarray, bool]:
    """Replace the worst outlier under the fitted outbreak mean.

    If the largest standardized residual ``(o - m) / sqrt(m)`` with
    ``m = lambda + delta`` exceeds ``gamma``, that day (earliest on ties) is
    set to ``m`` rounded to the nearest integer. Returns a new array; the
    input is never modified.
    """
    out = np.array(counts, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    mean = lambdas + _span_deltas(shape, lambdas.size)
    modified = False
    while out.size:
        res = (out - mean) / np.sqrt(mean)
        s = int(np.argmax(res))
        if not res[s] > gamma:
            break
        out[s] = _round_half_up(mean[s])
        modified = True
        if not iterative:
            break
    return out, modified


def log_lr_bank(counts, lambdas, bank: ProfileBank, *, remediation: bool = False,
                gamma: float = 23.0, iterative: bool = False) -> tuple[np.ndarray, int]:
    """Per-shape log LRs over one span, and how many shapes were remediated."""
    values = np.empty(len(bank))
    n_mod = 0
    for j, shape in enumerate(bank.shapes):
        c = counts
        if remediation:
            c, mod = remediate(counts, lambdas, shape, gamma, iterative=iterative)
            n_mod += mod
        values[j] = log_lr(c, lambdas, shape)
    return values, n_mod


def log_mix(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(logsumexp(values) - np.log(values.size))


def log_mlr(counts, lambdas, bank: ProfileBank, *, remediation: bool = False,
            gamma: float = 23.0, iterative: bool = False) -> float:
    """Log of the bank-averaged likelihood ratio for a start on the first day of ``counts``."""
    values, _ = log_lr_bank(counts, lambdas, bank, remediation=remediation, gamma=gamma,
                            iterative=iterative)
    return log_mix(values)


def slope_weights(S: int) -> np.ndarray:
    x = np.arange(1, S + 2, dtype=float)
    dx = x - x.mean()
    return dx / np.sum(dx ** 2)


def algorithm_score(log_R_history, S: int, *, scale: str = "linear", log_cap: float = 700.0) -> float:
    """Least-squares slope of the last ``S + 1`` scan values; 0 until that many exist."""
    if len(log_R_history) < S + 1:
        return 0.0
    tail = np.asarray(log_R_history[-(S + 1):], dtype=float)
    vals = np.exp(np.minimum(tail, log_cap)) if scale == "linear" else tail
    return float(slope_weights(S) @ vals)


@dataclass(frozen=True)
class ScanResult:
    t: int
    log_R: float
    t_star: int
    a: float
    window: tuple[int, int]
    starts: np.ndarray = field(repr=False)
    log_S: np.ndarray = field(repr=False)
    modified: int = 0
    saturated: bool = False

    @property
    def per_start(self) -> dict[int, float]:
        return {int(s): float(v) for s, v in zip(self.starts, self.log_S)}

    def same_as(self, other: "ScanResult") -> bool:
        return (self.t == other.t and self.log_R == other.log_R and self.t_star == other.t_star
                and self.a == other.a and self.window == other.window and self.modified == other.modified
                and np.array_equal(self.starts, other.starts) and np.array_equal(self.log_S, other.log_S))


class MLRSSDetector:
    """Streaming scan over daily counts; call ``step`` once per day, in order."""

    def __init__(self, config: DetectorConfig, *, incremental: bool = True):
        self.config = config
        self.incremental = incremental and not config.iterative_remediation
        self.t = 0
        self.t_star = 1
        self.log_R_history: list[float] = []
        self.score_history: list[float] = []
        self._counts: list[float] = []
        self._lams: list[float] = []
        n = len(config.bank)
        self._starts = np.empty(0, dtype=np.int64)
        self._acc = np.empty((0, n))
        self._maxres = np.empty((0, n))
        self._at_max = np.empty((0, n))
        self._repl_at_max = np.empty((0, n))

    def step(self, count, day: CalendarDay) -> ScanResult:
        if self.config.baseline is None:
            raise ValueError("config has no baseline model; use update() with explicit lambda")
        if day.t != self.t + 1:
            raise OutOfOrderDay(f"expected day {self.t + 1}, got {day.t}")
        lam = float(np.exp(build_design_row(day, self.config.baseline.spec) @ self.config.baseline.beta))
        if not np.isfinite(lam):
            raise Overflow(f"baseline mean overflows on day {day.t}")
        return self.update(count, lam)

    def update(self, count, lam: float) -> ScanResult:
        """Advance one day with an observed count and its baseline mean."""
        if not lam > 0:
            raise ValueError(f"baseline mean must be positive, got {lam}")
        cfg = self.config
        self.t += 1
        t = self.t
        self._counts.append(float(count))
        self._lams.append(float(lam))

        if t == 1:
            starts, log_S, n_mod = np.empty(0, dtype=np.int64), np.empty(0), 0
            lo, hi = 1, 0
            log_R, t_star = 0.0, 1
        else:
            lo = max(min(self.t_star, t - cfg.min_window), 1)
            if cfg.max_lookback is not None:
                lo = max(lo, t - cfg.max_lookback)
            hi = t - 1
            if self.incremental:
                starts, lr, n_mod = self._advance(lo)
            else:
                starts, lr, n_mod = self._recompute(lo)
            log_S = logsumexp(lr, axis=1) - np.log(lr.shape[1])
            best = int(np.argmax(log_S))
            log_R, t_star = float(log_S[best]), int(starts[best])

        self.t_star = t_star
        self.log_R_history.append(log_R)
        a = algorithm_score(self.log_R_history, cfg.S, scale=cfg.score_scale, log_cap=cfg.log_cap)
        self.score_history.append(a)
        saturated = cfg.score_scale == "linear" and log_R > cfg.log_cap
        return ScanResult(t, log_R, t_star, a, (lo, hi), starts, np.asarray(log_S), n_mod, saturated)

    def run(self, counts, lambdas) -> list[ScanResult]:
        return [self.update(o, lam) for o, lam in zip(counts, lambdas)]

    def _terms(self, t: int, starts: np.ndarray):
        """Daily term, residual and replacement term on day t for each (start, shape)."""
        o, lam = self._counts[t - 1], self._lams[t - 1]
        d = self.config.bank.curves(t - starts + 1)
        mean = lam + d
        logratio = np.log1p(d / lam)
        term = -d + o * logratio
        res = (o - mean) / np.sqrt(mean)
        repl = -d + _round_half_up(mean) * logratio
        return term, res, repl

    def _advance(self, lo: int):
        t = self.t
        keep = self._starts >= lo
        if not keep.all():
            self._starts = self._starts[keep]
            self._acc = self._acc[keep]
            self._maxres = self._maxres[keep]
            self._at_max = self._at_max[keep]
            self._repl_at_max = self._repl_at_max[keep]

        # the newest start t - 1 enters with its first day
        new = np.array([t - 1])
        term, res, repl = self._terms(t - 1, new)
        self._starts = np.concatenate([self._starts, new])
        self._acc = np.vstack([self._acc, term])
        self._maxres = np.vstack([self._maxres, res])
        self._at_max = np.vstack([self._at_max, term])
        self._repl_at_max = np.vstack([self._repl_at_max, repl])

        term, res, repl = self._terms(t, self._starts)
        self._acc = self._acc + term
        worse = res > self._maxres
        self._maxres = np.where(worse, res, self._maxres)
        self._at_max = np.where(worse, term, self._at_max)
        self._repl_at_max = np.where(worse, repl, self._repl_at_max)

        if self.config.remediation:
            hit = self._maxres > self.config.gamma
            lr = np.where(hit, self._acc - self._at_max + self._repl_at_max, self._acc)
            n_mod = int(hit.sum())
        else:
            lr, n_mod = self._acc, 0
        return self._starts.copy(), lr, n_mod

    def _recompute(self, lo: int):
        cfg = self.config
        t = self.t
        counts = np.asarray(self._counts)
        lams = np.asarray(self._lams)
        starts = np.arange(lo, t, dtype=np.int64)
        lr = np.empty((starts.size, len(cfg.bank)))
        n_mod = 0
        for i, t_o in enumerate(starts):
            lr[i], m = log_lr_bank(counts[t_o - 1:t], lams[t_o - 1:t], cfg.bank,
                                   remediation=cfg.remediation, gamma=cfg.gamma,
                                   iterative=cfg.iterative_remediation)
            n_mod += m
        return starts, lr, n_mod
