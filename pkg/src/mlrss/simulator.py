"""Synthetic daily counts from the baseline + outbreak Poisson model.

Counts are ``o_t ~ Poisson(lambda_t + sum_k delta_t(t_k, theta_k))``.
Poisson variates use a fixed, documented algorithm so that a seed maps to
the same stream on every platform:

* mean < 30: sequential-search inversion of the CDF from 0 upward,
  one uniform per variate;
* mean >= 30: Hormann's transformed rejection with squeeze (PTRS),
  two uniforms per trial.

Uniforms come from numpy's PCG64 bit generator, drawn in blocks of 1024.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .baseline import CONTEST_SPEC, DesignSpec, series_design
from .errors import DataError, IndexOutOfRange
from .profiles import Family, OutbreakSignature, ProfileShape
from .series import CountSeries

EFFECTIVE_FRACTION = 0.05
_LONG_HORIZON = 5000

# Roughly 50 counts/day: weekday lift, annual cycle, small higher harmonics.
DEFAULT_BETA = np.array([
    3.85, 0.15,
    0.25, 0.10, 0.05, -0.05, 0.02, 0.02, 0.01, 0.01, 0.005, 0.005,
    0.05, -0.03, 0.02, 0.01,
])

CENTRAL_THETA = {
    Family.LOGNORMAL: (30.0, math.log(5.0), 0.6),
    Family.GAUSSIAN: (40.0, 9.0, 12.0),
    Family.BIMODAL: (25.0, 5.0, 14.0, 8.0),
}


class UniformStream:
    """Block-buffered U(0,1) draws from a PCG64 generator."""

    def __init__(self, seed: int, block: int = 1024):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._block = block
        self._buf = np.empty(0)
        self._i = 0

    def __call__(self) -> float:
        if self._i == self._buf.size:
            self._buf = self._gen.random(self._block)
            self._i = 0
        x = float(self._buf[self._i])
        self._i += 1
        return x


def _poisson_inversion(mean: float, uniform) -> int:
    u = uniform()
    k = 0
    p = math.exp(-mean)
    cdf = p
    while u > cdf:
        k += 1
        p *= mean / k
        cdf += p
        if p == 0.0 and k > mean:
            break
    return k


def _poisson_ptrs(mean: float, uniform) -> int:
    slam = math.sqrt(mean)
    loglam = math.log(mean)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2)
    while True:
        U = uniform() - 0.5
        V = uniform()
        us = 0.5 - abs(U)
        k = math.floor((2 * a / us + b) * U + mean + 0.43)
        if us >= 0.07 and V <= vr:
            return k
        if k < 0 or (us < 0.013 and V > us):
            continue
        if (math.log(V) + math.log(invalpha) - math.log(a / (us * us) + b)
                <= -mean + k * loglam - math.lgamma(k + 1)):
            return k


def poisson_variate(mean: float, uniform) -> int:
    if mean < 0 or not math.isfinite(mean):
        raise ValueError(f"invalid Poisson mean {mean}")
    if mean == 0:
        return 0
    return _poisson_inversion(mean, uniform) if mean < 30 else _poisson_ptrs(mean, uniform)


def poisson_draws(means, seed: int) -> np.ndarray:
    uniform = UniformStream(seed)
    return np.array([poisson_variate(float(m), uniform) for m in np.asarray(means, dtype=float)],
                    dtype=np.int64)


@dataclass(frozen=True)
class OutbreakTruth:
    t_o: int
    shape: ProfileShape
    peak_day: int
    eff_start: int
    eff_end: int
    truncated: bool = False


def outbreak_truth(t_o: int, shape: ProfileShape, horizon: int) -> OutbreakTruth:
    """Peak day and effective span (excess above 5% of peak) of one outbreak."""
    u = np.arange(1, _LONG_HORIZON + 1)
    d = shape.curve(u)
    peak_u = int(np.argmax(d)) + 1
    above = np.nonzero(d > EFFECTIVE_FRACTION * d.max())[0]
    eff_start = t_o + int(above[0])
    eff_end = t_o + int(above[-1])
    return OutbreakTruth(int(t_o), shape, t_o + peak_u - 1, eff_start, min(eff_end, horizon),
                         eff_end > horizon)


@dataclass(frozen=True)
class Truth:
    """Ground truth: per-day total excess and the outbreak table."""

    start: dt.date
    delta: np.ndarray
    outbreaks: tuple[OutbreakTruth, ...] = ()

    def __len__(self):
        return self.delta.size

    def outbreak_mask(self, buffer: int = 0) -> np.ndarray:
        """True on days from each start through its effective end plus ``buffer`` (0-based array)."""
        mask = np.zeros(len(self), dtype=bool)
        for ob in self.outbreaks:
            lo = ob.t_o - 1
            hi = min(ob.eff_end + buffer, len(self))
            mask[lo:hi] = True
        return mask


@dataclass(frozen=True)
class SimConfig:
    horizon_days: int
    beta_true: np.ndarray = field(default_factory=lambda: DEFAULT_BETA.copy())
    spec: DesignSpec = CONTEST_SPEC
    outbreaks: Sequence[tuple[int, ProfileShape]] = ()
    seed: int = 0
    start: dt.date = dt.date(2001, 1, 1)


@dataclass(frozen=True)
class LabeledSeries:
    series: CountSeries
    lambdas: np.ndarray
    truth: Truth


def simulate(config: SimConfig) -> LabeledSeries:
    n = config.horizon_days
    blank = CountSeries(config.start, np.zeros(n, dtype=np.int64))
    lam = np.exp(series_design(blank, config.spec) @ np.asarray(config.beta_true, dtype=float))
    days = np.arange(1, n + 1)
    total = np.zeros(n)
    table = []
    for t_o, shape in config.outbreaks:
        total += shape.curve(days - t_o + 1)
        table.append(outbreak_truth(t_o, shape, n))
    counts = poisson_draws(lam + total, config.seed)
    return LabeledSeries(CountSeries(config.start, counts), lam, Truth(config.start, total, tuple(table)))


def extract_signature(labeled: LabeledSeries, index: int, *, lambdas=None,
                      margin: int = 2) -> OutbreakSignature:
    """Counts and baseline from an outbreak's start through its effective end plus ``margin`` days.

    ``lambdas`` overrides the true baseline, e.g. with a fitted one.
    """
    obs = labeled.truth.outbreaks
    if not 0 <= index < len(obs):
        raise IndexOutOfRange(f"outbreak index {index} not in [0, {len(obs)})")
    ob = obs[index]
    n = len(labeled.series)
    last = ob.eff_end + margin
    truncated = ob.truncated or last > n
    last = min(last, n)
    lam = labeled.lambdas if lambdas is None else np.asarray(lambdas, dtype=float)
    days = np.arange(ob.t_o, last + 1)
    return OutbreakSignature(labeled.series.counts[days - 1], lam[days - 1], ob.t_o, days, truncated)


def jitter_shape(central: ProfileShape, rng: np.random.Generator, amount: float = 0.25) -> ProfileShape:
    """Each parameter scaled by an independent U(1 - amount, 1 + amount) factor."""
    factors = rng.uniform(1 - amount, 1 + amount, size=len(central.theta))
    return ProfileShape(central.family, tuple(np.asarray(central.theta) * factors), central.form)


def training_scenario(family, seed: int, *, n_outbreaks: int = 30, central=None, jitter: float = 0.25,
                      beta=DEFAULT_BETA, spec: DesignSpec = CONTEST_SPEC, lead_in: int = 60,
                      gap: int = 20, start: dt.date = dt.date(2001, 1, 1)) -> LabeledSeries:
    """A series carrying ``n_outbreaks`` well-separated outbreaks with jittered parameters."""
    family = Family(family)
    central = ProfileShape(family, central or CENTRAL_THETA[family])
    rng = np.random.default_rng([seed, 1])
    shapes = [jitter_shape(central, rng, jitter) for _ in range(n_outbreaks)]
    outbreaks = []
    t = lead_in
    for shape in shapes:
        outbreaks.append((t, shape))
        span = outbreak_truth(t, shape, 10 ** 9).eff_end - t + 1
        t += span + gap
    return simulate(SimConfig(t + lead_in, np.asarray(beta), spec, outbreaks, seed, start))


def training_signatures(labeled: LabeledSeries, *, lambdas=None) -> list[OutbreakSignature]:
    return [extract_signature(labeled, i, lambdas=lambdas) for i in range(len(labeled.truth.outbreaks))]


# Sidecar files: per-day truth and the outbreak table.

def write_truth(labeled: LabeledSeries, truth_path, outbreaks_path) -> None:
    truth = labeled.truth
    rows = ["date,delta,lambda"]
    for d, de, la in zip(labeled.series.dates, truth.delta, labeled.lambdas):
        rows.append(f"{d.isoformat()},{float(de)!r},{float(la)!r}")
    Path(truth_path).write_text("\n".join(rows) + "\n", encoding="utf-8")
    rows = ["index,t_o,start_date,peak_day,eff_start,eff_end,truncated,family,form,theta"]
    for i, ob in enumerate(truth.outbreaks):
        theta = " ".join(repr(float(x)) for x in ob.shape.theta)
        rows.append(f"{i},{ob.t_o},{labeled.series.date_of(ob.t_o).isoformat()},{ob.peak_day},"
                    f"{ob.eff_start},{ob.eff_end},{int(ob.truncated)},{ob.shape.family.value},"
                    f"{ob.shape.form},{theta}")
    Path(outbreaks_path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_outbreaks(path) -> tuple[OutbreakTruth, ...]:
    obs = []
    try:
        for ln in Path(path).read_text(encoding="utf-8").splitlines()[1:]:
            if not ln.strip():
                continue
            f = ln.split(",")
            shape = ProfileShape(Family(f[7]), tuple(float(x) for x in f[9].split()), f[8])
            obs.append(OutbreakTruth(int(f[1]), shape, int(f[3]), int(f[4]), int(f[5]), bool(int(f[6]))))
    except (ValueError, IndexError, OSError) as exc:
        raise DataError(f"malformed outbreak table {path}: {exc}") from exc
    return tuple(obs)


def read_truth(truth_path, outbreaks_path) -> tuple[Truth, np.ndarray]:
    """Returns the truth and the per-day true baseline means."""
    try:
        lines = Path(truth_path).read_text(encoding="utf-8").splitlines()[1:]
        recs = [ln.split(",") for ln in lines if ln.strip()]
        start = dt.date.fromisoformat(recs[0][0])
        delta = np.array([float(r[1]) for r in recs])
        lam = np.array([float(r[2]) for r in recs])
    except (ValueError, IndexError, OSError) as exc:
        raise DataError(f"malformed truth file {truth_path}: {exc}") from exc
    return Truth(start, delta, read_outbreaks(outbreaks_path)), lam


def sidecar_paths(counts_path) -> tuple[Path, Path]:
    """Truth and outbreak-table paths that accompany a count file."""
    p = Path(counts_path)
    stem = p.name[:-4] if p.name.endswith(".csv") else p.name
    return p.with_name(stem + ".truth.csv"), p.with_name(stem + ".outbreaks.csv")
