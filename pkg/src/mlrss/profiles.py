"""Parametric outbreak profiles, their Poisson MLE, and the profile bank.

All three families depend on time only through ``u = t - t_o + 1``
(``u = 1`` on the start day) and vanish for ``t < t_o``:

* ``lognormal``: ``c * exp(-(log u - mu)**2 / sigma)``
* ``gaussian``:  ``c * exp(-(u - mu)**2 / sigma)``
* ``bimodal``:   ``c * (exp(-(u - mu1)**2 / sigma) + exp(-(u - mu2)**2 / sigma))``

The bimodal family also has a ``"product"`` form,
``c * exp(-((u - mu1)**2 + (u - mu2)**2) / sigma)``, which is a single
Gaussian bump centred between the two locations. ``sigma`` is used exactly
as written, i.e. it plays the role of ``2 * variance``.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DataError, EmptyBank, FitFailed

log = logging.getLogger(__name__)

BANK_TAG = "mlrss-bank"
BANK_VERSION = 1


class Family(str, Enum):
    LOGNORMAL = "lognormal"
    GAUSSIAN = "gaussian"
    BIMODAL = "bimodal"

    @property
    def param_names(self) -> tuple[str, ...]:
        if self is Family.BIMODAL:
            return ("c", "mu1", "mu2", "sigma")
        return ("c", "mu", "sigma")


BIMODAL_FORMS = ("sum", "product")


@dataclass(frozen=True)
class ProfileShape:
    family: Family
    theta: tuple[float, ...]
    form: str = "sum"

    def __post_init__(self):
        fam = Family(self.family)
        theta = tuple(float(x) for x in self.theta)
        object.__setattr__(self, "family", fam)
        if len(theta) != len(fam.param_names):
            raise ValueError(f"{fam.value} takes parameters {fam.param_names}")
        if fam is Family.BIMODAL and theta[1] > theta[2]:
            theta = (theta[0], theta[2], theta[1], theta[3])
        object.__setattr__(self, "theta", theta)
        if not (theta[0] > 0 and theta[-1] > 0):
            raise ValueError(f"c and sigma must be positive, got {theta}")
        if self.form not in BIMODAL_FORMS:
            raise ValueError(f"form must be one of {BIMODAL_FORMS}")

    @property
    def c(self) -> float:
        return self.theta[0]

    @property
    def sigma(self) -> float:
        return self.theta[-1]

    def curve(self, u) -> np.ndarray:
        """Excess mean at outbreak day ``u`` (1 on the start day); 0 for u < 1."""
        return _curve(self.family, np.asarray(self.theta)[:, None], np.asarray(u, dtype=float)[None, :],
                      self.form)[0]


def _curve(family: Family, theta: np.ndarray, u: np.ndarray, form: str = "sum") -> np.ndarray:
    """Vectorised kernel; ``theta`` rows are parameters, broadcast against ``u``."""
    c, sigma = theta[0], theta[-1]
    active = u >= 1
    uu = np.where(active, u, 1.0)
    if family is Family.LOGNORMAL:
        out = c * np.exp(-(np.log(uu) - theta[1]) ** 2 / sigma)
    elif family is Family.GAUSSIAN:
        out = c * np.exp(-(uu - theta[1]) ** 2 / sigma)
    elif form == "product":
        out = c * np.exp(-((uu - theta[1]) ** 2 + (uu - theta[2]) ** 2) / sigma)
    else:
        out = c * (np.exp(-(uu - theta[1]) ** 2 / sigma) + np.exp(-(uu - theta[2]) ** 2 / sigma))
    return np.where(active, out, 0.0)


def delta(shape: ProfileShape, t, t_o):
    """Outbreak excess on day(s) ``t`` for an outbreak starting on ``t_o``."""
    u = np.asarray(t) - np.asarray(t_o) + 1
    out = shape.curve(np.atleast_1d(u))
    return out.reshape(np.shape(u)) if np.ndim(u) else float(out[0])


@dataclass(frozen=True)
class OutbreakSignature:
    """Counts and baseline means over a labelled outbreak window.

    ``days`` are the absolute day indices of the window and ``start`` is the
    outbreak start day, so ``u = days - start + 1``.
    """

    counts: np.ndarray
    baseline: np.ndarray
    start: int
    days: np.ndarray | None = None
    truncated: bool = False

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        baseline = np.asarray(self.baseline, dtype=float)
        if counts.shape != baseline.shape or counts.ndim != 1:
            raise DataError("signature counts and baseline must be equal-length vectors")
        if np.any(baseline <= 0):
            raise DataError("signature baseline must be strictly positive")
        days = (np.arange(self.start, self.start + counts.size) if self.days is None
                else np.asarray(self.days, dtype=np.int64))
        if days.shape != counts.shape:
            raise DataError("signature days must match counts")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "baseline", baseline)
        object.__setattr__(self, "days", days)

    @property
    def u(self) -> np.ndarray:
        return (self.days - self.start + 1).astype(float)

    @property
    def excess(self) -> np.ndarray:
        return self.counts - self.baseline


def signature_loglik(sig: OutbreakSignature, shape: ProfileShape) -> float:
    """Poisson log-likelihood of the signature under mean ``lambda + delta`` (constant dropped)."""
    mean = sig.baseline + shape.curve(sig.u)
    return float(np.sum(sig.counts * np.log(mean) - mean))


# The four-parameter bimodal surface has more local optima than the others.
_DEFAULT_POLISH = {Family.LOGNORMAL: 4, Family.GAUSSIAN: 4, Family.BIMODAL: 10}


@dataclass(frozen=True)
class FitOptions:
    n_polish: int | None = None
    max_restarts: int = 3
    max_evals: int = 2000
    xatol: float = 1e-6
    fatol: float = 1e-10
    min_c: float = 1e-3
    form: str = "sum"


def _search_box(sig: OutbreakSignature, family: Family) -> tuple[np.ndarray, np.ndarray]:
    """Generous bounds on (log c, locations, log sigma); the objective is infinite outside."""
    u_lo, u_hi = max(float(sig.u.min()), 1.0), max(float(sig.u.max()), 2.0)
    w = u_hi - u_lo + 1.0
    peak = max(float(np.max(sig.excess)), 1.0)
    if family is Family.LOGNORMAL:
        loc = (-2.0, np.log(u_hi) + 2.0)
        sig_lo, sig_hi = 1e-3, 100.0 * np.log(u_hi) ** 2 + 1.0
    else:
        loc = (u_lo - w, u_hi + w)
        sig_lo, sig_hi = 1e-2, 100.0 * w ** 2
    n_loc = 2 if family is Family.BIMODAL else 1
    lo = np.array([np.log(1e-6), *[loc[0]] * n_loc, np.log(sig_lo)])
    hi = np.array([np.log(100.0 * peak + 100.0), *[loc[1]] * n_loc, np.log(sig_hi)])
    return lo, hi


def _start_grid(sig: OutbreakSignature, family: Family) -> list[np.ndarray]:
    """Starting points in the optimiser's (log c, locations, log sigma) coordinates."""
    peak = max(float(np.max(sig.excess)), 1.0)
    u = sig.u
    u_lo, u_hi = max(float(u.min()), 1.0), max(float(u.max()), 2.0)
    w = u_hi - u_lo + 1.0
    locs = [u_lo + q * (u_hi - u_lo) for q in (0.25, 0.5, 0.75)]
    if family is Family.LOGNORMAL:
        locs = [np.log(x) for x in locs]
        span = np.log(u_hi)
        sigmas = [span ** 2 / 64, span ** 2 / 16, span ** 2 / 4]
    else:
        sigmas = [1.0, w / 4, w ** 2 / 4]
    cs = [peak / 4, peak, 4 * peak]
    if family is Family.BIMODAL:
        pairs = [(a, b) for a, b in itertools.product(locs, locs) if a <= b]
        return [np.array([np.log(c), m1, m2, np.log(s)])
                for c, (m1, m2), s in itertools.product(cs, pairs, sigmas)]
    return [np.array([np.log(c), m, np.log(s)]) for c, m, s in itertools.product(cs, locs, sigmas)]


def _to_theta(x: np.ndarray) -> np.ndarray:
    theta = x.copy()
    theta[0] = np.exp(x[0])
    theta[-1] = np.exp(x[-1])
    return theta


def fit_theta(sig: OutbreakSignature, family, options: FitOptions = FitOptions()) -> ProfileShape:
    """Maximum-likelihood profile parameters for one outbreak signature.

    Every grid start is scored; Nelder-Mead runs from the best
    ``options.n_polish`` of them (a per-family default when unset), then restarts from the winner until a
    restart stops improving. ``c`` and ``sigma`` are optimised on the log
    scale to stay positive, and all parameters are confined to a wide box
    around the window.

    Raises:
        FitFailed: no finite optimum, or the fitted severity collapses below
            ``options.min_c`` (the window shows no excess over baseline).
    """
    family = Family(family)
    n_par = len(family.param_names)
    if sig.counts.size < n_par + 1:
        raise DataError(f"window of {sig.counts.size} days is too short for {n_par} parameters")
    u = sig.u[None, :]
    y, lam = sig.counts, sig.baseline

    box_lo, box_hi = _search_box(sig, family)

    def nll(x):
        if not np.all(np.isfinite(x)) or np.any(x < box_lo) or np.any(x > box_hi):
            return np.inf
        mean = lam + _curve(family, _to_theta(x)[:, None], u, options.form)[0]
        return -float(np.sum(y * np.log(mean) - mean))

    starts = _start_grid(sig, family)
    scores = np.array([nll(x) for x in starts])
    n_polish = options.n_polish or _DEFAULT_POLISH[family]
    order = np.argsort(scores, kind="stable")[:n_polish]
    nm = dict(maxfev=options.max_evals, xatol=options.xatol, fatol=options.fatol)
    best_x, best_f = starts[order[0]], scores[order[0]]
    for i in order:
        res = minimize(nll, starts[i], method="Nelder-Mead", options=nm)
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
    for _ in range(options.max_restarts):
        res = minimize(nll, best_x, method="Nelder-Mead", options=nm)
        if not res.fun < best_f - options.fatol:
            break
        best_x, best_f = res.x, res.fun
    if not np.isfinite(best_f):
        raise FitFailed("no finite likelihood from any start")
    theta = _to_theta(best_x)
    shape = ProfileShape(family, tuple(theta), options.form)
    if np.max(shape.curve(sig.u)) < options.min_c:
        raise FitFailed(f"fitted excess vanishes (c={theta[0]:.3g}); no outbreak signal in window")
    return shape


@dataclass(frozen=True)
class ProfileBank:
    """Discrete-uniform mixing set of fitted profile shapes."""

    shapes: tuple[ProfileShape, ...]
    n_failed: int = 0

    def __post_init__(self):
        shapes = tuple(self.shapes)
        if not shapes:
            raise EmptyBank("a profile bank needs at least one shape")
        if len({(s.family, s.form) for s in shapes}) != 1:
            raise ValueError("all shapes in a bank must share a family and form")
        object.__setattr__(self, "shapes", shapes)

    def __len__(self):
        return len(self.shapes)

    @property
    def family(self) -> Family:
        return self.shapes[0].family

    @property
    def form(self) -> str:
        return self.shapes[0].form

    @property
    def theta_matrix(self) -> np.ndarray:
        """Parameters as a (n_params, n_shapes) array."""
        return np.array([s.theta for s in self.shapes]).T

    def curves(self, u) -> np.ndarray:
        """Excess means with shape (len(u), n_shapes)."""
        u = np.asarray(u, dtype=float)
        return _curve(self.family, self.theta_matrix, u[:, None], self.form)

    def support(self, frac: float = 0.05, horizon: int = 1000) -> int:
        """Largest ``u`` at which any shape still exceeds ``frac`` of its own peak."""
        d = self.curves(np.arange(1, horizon + 1))
        above = d > frac * d.max(axis=0)
        return int(np.max(np.nonzero(above.any(axis=1))[0]) + 1)

    def save(self, path) -> None:
        lines = [f"# {BANK_TAG} v{BANK_VERSION} family={self.family.value} form={self.form}",
                 ",".join(self.family.param_names)]
        lines += [",".join(repr(float(x)) for x in s.theta) for s in self.shapes]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ProfileBank":
        lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
        try:
            head = lines[0].split()
            if head[:3] != ["#", BANK_TAG, f"v{BANK_VERSION}"]:
                raise ValueError("bad header")
            meta = dict(kv.split("=") for kv in head[3:])
            family = Family(meta["family"])
            shapes = [ProfileShape(family, tuple(float(x) for x in ln.split(",")), meta.get("form", "sum"))
                      for ln in lines[2:]]
        except (ValueError, KeyError, IndexError) as exc:
            raise DataError(f"{path}: malformed profile bank") from exc
        return cls(tuple(shapes))


def build_bank(signatures: Sequence[OutbreakSignature], family,
               options: FitOptions = FitOptions()) -> ProfileBank:
    """Fit one shape per signature, in input order; failed fits are dropped."""
    if not signatures:
        raise EmptyBank("no signatures given")
    shapes, failed = [], 0
    for i, sig in enumerate(signatures):
        try:
            shapes.append(fit_theta(sig, family, options))
        except FitFailed as exc:
            failed += 1
            log.info("signature %d: %s", i, exc)
    if failed:
        warnings.warn(f"{failed} of {len(signatures)} profile fits failed and were excluded")
    if not shapes:
        raise EmptyBank("every profile fit failed")
    return ProfileBank(tuple(shapes), failed)
