"""EWMA of truncated standardized residuals against a fixed baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveLambda


@dataclass(frozen=True)
class EwmaState:
    phi: float = 0.25
    a: float = 0.0

    def __post_init__(self):
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi must lie in (0, 1], got {self.phi}")


def truncated_residual(o_t, lambda_t) -> float:
    if not lambda_t > 0:
        raise NonpositiveLambda(f"baseline mean must be positive, got {lambda_t}")
    return max(o_t - lambda_t, 0.0) / math.sqrt(lambda_t)


def ewma_step(state: EwmaState, o_t, lambda_t) -> EwmaState:
    """One update ``a_t = (1 - phi) * a_{t-1} + phi * r_t``; the score is ``new.a``."""
    r = truncated_residual(o_t, lambda_t)
    return EwmaState(state.phi, (1.0 - state.phi) * state.a + state.phi * r)


def ewma_scores(counts, lambdas, phi: float = 0.25) -> np.ndarray:
    state = EwmaState(phi)
    out = np.empty(len(counts))
    for i, (o, lam) in enumerate(zip(counts, lambdas)):
        state = ewma_step(state, float(o), float(lam))
        out[i] = state.a
    return out
