"""Simulation study comparing the scan detector with EWMA on one source.

Each replicate draws an independent training series (30 jittered
outbreaks) to fit the baseline and the profile bank, a two-year
outbreak-free stream to set each method's threshold at one false alarm
per 100 days, and a two-year test stream with evenly spaced outbreaks.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .baseline import CONTEST_SPEC, BaselineModel, fit_baseline
from .comparators import ewma_scores
from .detector import DetectorConfig, MLRSSDetector
from .evaluation import EvaluationReport, evaluate, threshold_for_rate
from .profiles import Family, ProfileBank, ProfileShape, build_bank
from .simulator import (CENTRAL_THETA, DEFAULT_BETA, LabeledSeries, SimConfig, jitter_shape, simulate,
                        training_scenario, training_signatures)


def spaced_outbreak_stream(seed: int, central: ProfileShape, *, horizon: int = 730, n_outbreaks: int = 20,
                           lead_in: int = 10, jitter: float = 0.25, beta=DEFAULT_BETA,
                           start: dt.date = dt.date(2004, 1, 1)) -> LabeledSeries:
    """Outbreaks at ``lead_in + k * horizon // n_outbreaks`` plus a 0-5 day offset."""
    rng = np.random.default_rng([seed, 7])
    spacing = horizon // n_outbreaks
    outbreaks = [(lead_in + spacing * k + int(rng.integers(0, 6)), jitter_shape(central, rng, jitter))
                 for k in range(n_outbreaks)]
    return simulate(SimConfig(horizon, np.asarray(beta), CONTEST_SPEC, outbreaks, seed, start))


def train(family, seed: int, *, central=None, beta=DEFAULT_BETA) -> tuple[BaselineModel, ProfileBank]:
    """Fit the baseline on outbreak-free training days, then the bank on the 30 signatures."""
    tr = training_scenario(family, seed, central=central, beta=beta)
    model = fit_baseline(tr.series, mask=~tr.truth.outbreak_mask(buffer=5))
    bank = build_bank(training_signatures(tr, lambdas=model.lambdas(tr.series)), family)
    return model, bank


def scan_scores(config: DetectorConfig, counts, lambdas) -> np.ndarray:
    return np.array([r.a for r in MLRSSDetector(config).run(counts, lambdas)])


@dataclass(frozen=True)
class ReplicateResult:
    seed: int
    mlrss: EvaluationReport
    ewma: EvaluationReport
    mlrss_before_peak: int
    n_outbreaks: int

    @property
    def delay_ok(self) -> bool:
        return self.mlrss.mean_delay <= self.ewma.mean_delay

    @property
    def before_peak_ok(self) -> bool:
        return self.mlrss_before_peak >= 0.9 * self.n_outbreaks

    @property
    def ok(self) -> bool:
        return self.delay_ok and self.before_peak_ok

    def line(self) -> str:
        return (f"seed {self.seed}: mlrss delay {self.mlrss.mean_delay:.2f} (missed {self.mlrss.missed}, "
                f"before peak {self.mlrss_before_peak}/{self.n_outbreaks}) | ewma delay "
                f"{self.ewma.mean_delay:.2f} (missed {self.ewma.missed}) -> {'ok' if self.ok else 'FAIL'}")


def before_peak(report: EvaluationReport, labeled: LabeledSeries) -> int:
    return sum(1 for d, ob in zip(report.delays, labeled.truth.outbreaks)
               if np.isfinite(d) and ob.t_o + d < ob.peak_day)


def run_replicate(seed: int, *, family=Family.GAUSSIAN, S: int = 12, central=None, phi: float = 0.25,
                  rate_per_100: float = 1.0, max_lookback="support", **detector_kw) -> ReplicateResult:
    family = Family(family)
    central = ProfileShape(family, central or CENTRAL_THETA[family])
    model, bank = train(family, 1000 + seed, central=central.theta)
    if max_lookback == "support":
        max_lookback = max(bank.support(), detector_kw.get("min_window", 10))
    cfg = DetectorConfig(bank, model, S=S, max_lookback=max_lookback, **detector_kw)

    null = simulate(SimConfig(730, DEFAULT_BETA.copy(), CONTEST_SPEC, (), 2000 + seed, dt.date(2002, 1, 1)))
    test = spaced_outbreak_stream(3000 + seed, central)
    lam_null, lam_test = model.lambdas(null.series), model.lambdas(test.series)

    th_m = threshold_for_rate(scan_scores(cfg, null.series.counts, lam_null), rate_per_100)
    th_e = threshold_for_rate(ewma_scores(null.series.counts, lam_null, phi), rate_per_100)
    rep_m = evaluate(scan_scores(cfg, test.series.counts, lam_test), test.truth, th_m)
    rep_e = evaluate(ewma_scores(test.series.counts, lam_test, phi), test.truth, th_e)
    return ReplicateResult(seed, rep_m, rep_e, before_peak(rep_m, test), len(test.truth.outbreaks))
