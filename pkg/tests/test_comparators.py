import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlrss.comparators import EwmaState, ewma_scores, ewma_step, truncated_residual
from mlrss.errors import NonpositiveLambda


def closed_form(r, phi):
    t = len(r)
    return np.array([phi * sum((1 - phi) ** (k - s) * r[s] for s in range(k + 1)) for k in range(t)])


def test_first_step():
    assert ewma_step(EwmaState(), 36, 16.0).a == 1.25


def test_below_baseline_stays_zero():
    lam = np.linspace(5, 80, 300)
    assert np.all(ewma_scores(np.floor(lam * 0.9), lam) == 0.0)


def test_constant_residual_converges_geometrically():
    a = ewma_scores(np.full(30, 36), np.full(30, 16.0))
    t = np.arange(1, 31)
    np.testing.assert_allclose(np.abs(a - 5.0), 0.75 ** t * 5.0, rtol=1e-12)


@given(st.lists(st.floats(0, 200), min_size=1, max_size=40), st.floats(0.05, 1.0))
def test_recursion_matches_closed_form(counts, phi):
    lam = np.full(len(counts), 20.0)
    r = [truncated_residual(o, 20.0) for o in counts]
    np.testing.assert_allclose(ewma_scores(counts, lam, phi), closed_form(r, phi), rtol=1e-12, atol=1e-12)


@given(st.lists(st.integers(0, 100), min_size=2, max_size=30), st.integers(0, 29), st.integers(1, 50))
def test_monotone_in_each_residual(counts, i, bump):
    i %= len(counts)
    lam = np.full(len(counts), 25.0)
    bumped = list(counts)
    bumped[i] += bump
    assert np.all(ewma_scores(bumped, lam) >= ewma_scores(counts, lam))


def test_nonpositive_lambda():
    with pytest.raises(NonpositiveLambda):
        ewma_scores([3, 4], [2.0, 0.0])


def test_phi_range():
    with pytest.raises(ValueError):
        EwmaState(phi=0.0)
