import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlrss.errors import RangeMismatch
from mlrss.evaluation import amoc, evaluate, threshold_for_rate, write_amoc
from mlrss.profiles import ProfileShape
from mlrss.simulator import Truth, outbreak_truth

SHAPE = ProfileShape("gaussian", (40.0, 5.0, 4.0))


def make_truth(n=200, starts=(30, 120)):
    days = np.arange(1, n + 1)
    delta = sum(SHAPE.curve(days - s + 1) for s in starts)
    return Truth(dt.date(2001, 1, 1), delta, tuple(outbreak_truth(s, SHAPE, n) for s in starts))


def test_infinite_thresholds():
    truth = make_truth()
    scores = np.random.default_rng(0).normal(size=200)
    rep = evaluate(scores, truth, np.inf)
    assert rep.alarms == () and rep.missed == 2 and rep.false_alarm_rate == 0.0
    rep = evaluate(scores, truth, -np.inf)
    assert rep.delays == (0.0, 0.0) and len(rep.alarms) == 200
    assert rep.false_alarm_rate == 100.0


def test_single_alarm_fixture():
    truth = make_truth(starts=(50,))
    scores = np.zeros(200)
    scores[50 + 3 - 1] = 1.0
    rep = evaluate(scores, truth, 0.5)
    assert rep.delays == (3.0,) and rep.false_alarms == 0 and rep.mean_delay == 3.0


def test_buffer_days_are_neither_credit_nor_false_alarm():
    truth = make_truth(starts=(50,))
    ob = truth.outbreaks[0]
    scores = np.zeros(200)
    scores[ob.eff_end + 2 - 1] = 1.0
    rep = evaluate(scores, truth, 0.5)
    assert rep.missed == 1 and rep.false_alarms == 0
    scores[ob.eff_end + 6 - 1] = 1.0
    assert evaluate(scores, truth, 0.5).false_alarms == 1
    assert evaluate(scores, truth, 0.5).null_days == 200 - (ob.eff_end + 5 - ob.t_o + 1)


def test_range_mismatch():
    with pytest.raises(RangeMismatch):
        evaluate(np.zeros(10), make_truth(), 0.0)


def test_single_threshold_amoc_equals_evaluate():
    truth = make_truth()
    scores = np.random.default_rng(1).normal(size=200)
    (pt,) = amoc(scores, truth, [0.7])
    rep = evaluate(scores, truth, 0.7)
    assert (pt.false_alarm_rate, pt.missed) == (rep.false_alarm_rate, rep.missed)
    assert pt.mean_delay == rep.mean_delay or (np.isnan(pt.mean_delay) and np.isnan(rep.mean_delay))


@given(st.integers(0, 10_000), st.floats(-2, 2), st.floats(0, 2))
def test_nested_alarm_sets(seed, lo, gap):
    truth = make_truth()
    scores = np.random.default_rng(seed).normal(size=200)
    assert set(evaluate(scores, truth, lo + gap).alarms) <= set(evaluate(scores, truth, lo).alarms)


def test_amoc_sorted_and_capped_delay_monotone():
    truth = make_truth()
    rng = np.random.default_rng(2)
    scores = rng.normal(size=200) + 3 * (truth.delta > 5)
    pts = amoc(scores, truth, np.linspace(-1, 5, 40))
    rates = [p.false_alarm_rate for p in pts]
    capped = [p.mean_capped_delay for p in pts]
    assert rates == sorted(rates)
    assert all(b <= a + 1e-12 for a, b in zip(capped, capped[1:]))


def test_false_alarm_rate_tracks_exceedance_probability():
    n = 20_000
    truth = Truth(dt.date(2001, 1, 1), np.zeros(n))
    scores = np.random.default_rng(3).uniform(size=n)
    for p in (0.01, 0.05, 0.2, 0.5):
        rate = evaluate(scores, truth, 1 - p).false_alarm_rate
        assert rate == pytest.approx(100 * p, abs=4 * 100 * np.sqrt(p * (1 - p) / n))


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=400), st.floats(0, 20))
def test_threshold_for_rate_bound(values, rate):
    th = threshold_for_rate(values, rate)
    v = np.asarray(values)
    assert 100 * np.sum(v > th) / v.size <= rate + 1e-9


def test_write_amoc(tmp_path):
    truth = make_truth()
    pts = amoc(np.linspace(0, 1, 200), truth, [0.2, 0.8])
    write_amoc(pts, tmp_path / "a.csv")
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0].startswith("false_alarm_rate,mean_delay") and len(lines) == 3
