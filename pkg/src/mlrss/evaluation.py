"""Alarm metrics: detection delay, false-alarm rate and AMOC curves.

An outbreak's detection window runs from its start day through the end of
its effective span (excess above 5% of peak). The ``buffer`` days after
that are neither credited as detections nor counted as false alarms,
since the scan statistic legitimately stays high once an outbreak ends.
All remaining days are outbreak-free and count toward the false-alarm rate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RangeMismatch
from .simulator import Truth


@dataclass(frozen=True)
class EvaluationReport:
    threshold: float
    alarms: tuple[int, ...]
    delays: tuple[float, ...]
    false_alarms: int
    null_days: int
    window_lengths: tuple[int, ...] = ()

    @property
    def false_alarm_rate(self) -> float:
        """Alarms per 100 outbreak-free days."""
        return 100.0 * self.false_alarms / self.null_days if self.null_days else 0.0

    @property
    def detected(self) -> int:
        return int(sum(np.isfinite(d) for d in self.delays))

    @property
    def missed(self) -> int:
        return len(self.delays) - self.detected

    @property
    def mean_delay(self) -> float:
        """Mean over detected outbreaks only; NaN if none were detected."""
        finite = [d for d in self.delays if np.isfinite(d)]
        return float(np.mean(finite)) if finite else float("nan")

    @property
    def mean_capped_delay(self) -> float:
        """Mean delay with each miss charged its full detection-window length."""
        if not self.delays:
            return float("nan")
        vals = [d if np.isfinite(d) else w for d, w in zip(self.delays, self.window_lengths)]
        return float(np.mean(vals))

    def summary(self) -> dict:
        return {
            "threshold": self.threshold,
            "n_alarms": len(self.alarms),
            "false_alarms": self.false_alarms,
            "null_days": self.null_days,
            "false_alarm_rate_per_100": self.false_alarm_rate,
            "detected": self.detected,
            "missed": self.missed,
            "mean_delay": _finite_or_none(self.mean_delay),
            "mean_capped_delay": _finite_or_none(self.mean_capped_delay),
            "delays": [d if np.isfinite(d) else None for d in self.delays],
        }


def _finite_or_none(x: float):
    return float(x) if np.isfinite(x) else None


def evaluate(scores, truth: Truth, threshold: float, *, buffer: int = 5) -> EvaluationReport:
    """Alarm on day t iff ``scores[t-1] > threshold``; delays are measured from each start day."""
    scores = np.asarray(scores, dtype=float)
    if scores.size != len(truth):
        raise RangeMismatch(f"{scores.size} scores for {len(truth)} truth days")
    alarm = scores > threshold
    delays, lengths = [], []
    for ob in truth.outbreaks:
        lo, hi = ob.t_o, ob.eff_end
        lengths.append(hi - lo + 1)
        hits = np.nonzero(alarm[lo - 1:hi])[0]
        delays.append(float(hits[0]) if hits.size else float("inf"))
    null = ~truth.outbreak_mask(buffer)
    return EvaluationReport(
        float(threshold),
        tuple(int(t) for t in np.nonzero(alarm)[0] + 1),
        tuple(delays),
        int(np.sum(alarm & null)),
        int(np.sum(null)),
        tuple(lengths),
    )


@dataclass(frozen=True)
class AmocPoint:
    threshold: float
    false_alarm_rate: float
    mean_delay: float
    missed: int
    mean_capped_delay: float


def amoc(scores, truth: Truth, thresholds, *, buffer: int = 5) -> list[AmocPoint]:
    """One evaluation per threshold, ordered by false-alarm rate then descending threshold."""
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("empty threshold grid")
    pts = []
    for th in sorted(set(float(x) for x in thresholds), reverse=True):
        rep = evaluate(scores, truth, th, buffer=buffer)
        pts.append(AmocPoint(th, rep.false_alarm_rate, rep.mean_delay, rep.missed, rep.mean_capped_delay))
    # stable sort keeps descending-threshold order within equal rates
    return sorted(pts, key=lambda p: p.false_alarm_rate)


def threshold_for_rate(null_scores, max_rate_per_100: float = 1.0) -> float:
    """Smallest threshold at which at most ``max_rate_per_100`` of null days alarm."""
    s = np.sort(np.asarray(null_scores, dtype=float))
    n = s.size
    allowed = int(np.floor(max_rate_per_100 * n / 100.0))
    if allowed >= n:
        return float(-np.inf)
    # alarms are strict exceedances: choose the (n - allowed)-th smallest score
    return float(s[n - allowed - 1])


def write_amoc(points: list[AmocPoint], path) -> None:
    rows = ["false_alarm_rate,mean_delay,missed,mean_capped_delay,threshold"]
    rows += [f"{p.false_alarm_rate!r},{p.mean_delay!r},{p.missed},{p.mean_capped_delay!r},{p.threshold!r}"
             for p in points]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_report(report: EvaluationReport, path) -> None:
    Path(path).write_text(json.dumps(report.summary(), indent=2) + "\n", encoding="utf-8")
