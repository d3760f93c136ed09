import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from mlrss.errors import IndexOutOfRange
from mlrss.profiles import Family, ProfileShape, fit_theta
from mlrss.series import read_counts, write_counts
from mlrss.simulator import (CENTRAL_THETA, SimConfig, UniformStream, extract_signature, poisson_draws,
                             poisson_variate, read_truth, sidecar_paths, simulate, training_scenario,
                             write_truth)

FLAT20 = np.array([math.log(20.0), 0.0])


def test_moments_of_pure_baseline(flat_spec):
    counts = simulate(SimConfig(10_000, FLAT20, flat_spec, seed=11)).series.counts
    assert abs(counts.mean() - 20) <= 3 * math.sqrt(20 / 10_000) * 3
    assert 0.95 <= counts.var(ddof=1) / counts.mean() <= 1.05


def test_dispersion_under_seasonal_baseline():
    sim = simulate(SimConfig(6000, seed=12))
    z = (sim.series.counts - sim.lambdas) / np.sqrt(sim.lambdas)
    assert abs(z.mean()) < 4 / math.sqrt(6000)
    assert 0.9 <= z.var() <= 1.1


def test_same_seed_same_series(flat_spec):
    shape = ProfileShape("gaussian", (30.0, 8.0, 12.0))
    cfg = SimConfig(300, FLAT20, flat_spec, [(40, shape), (45, shape)], seed=3)
    a, b = simulate(cfg), simulate(cfg)
    np.testing.assert_array_equal(a.series.counts, b.series.counts)
    np.testing.assert_array_equal(a.truth.delta, b.truth.delta)
    assert a.truth.outbreaks == b.truth.outbreaks


def test_overlapping_outbreaks_add(flat_spec):
    shape = ProfileShape("gaussian", (30.0, 8.0, 12.0))
    sim = simulate(SimConfig(120, FLAT20, flat_spec, [(40, shape), (45, shape)], seed=3))
    days = np.arange(1, 121)
    np.testing.assert_allclose(sim.truth.delta, shape.curve(days - 39) + shape.curve(days - 44))


def test_peak_mean_matches_analytic(flat_spec):
    c, mu, sigma = 50.0, 8.0, 10.0
    shape = ProfileShape("gaussian", (c, mu, sigma))
    t_o = 10
    peak = t_o + int(mu) - 1
    excess = []
    for seed in range(200):
        counts = simulate(SimConfig(40, FLAT20, flat_spec, [(t_o, shape)], seed=seed)).series.counts
        excess.append(counts[peak - 2:peak + 1].mean() - 20.0)
    expect = c * (1 + 2 * math.exp(-1 / sigma)) / 3
    se = np.std(excess, ddof=1) / math.sqrt(len(excess))
    assert abs(np.mean(excess) - expect) <= 3 * se


@pytest.mark.parametrize("mean", [0.3, 4.0, 17.5, 29.9, 30.0, 55.0, 400.0])
def test_sampler_matches_poisson_distribution(mean):
    draws = poisson_draws(np.full(20_000, mean), seed=int(mean * 10))
    hi = int(stats.poisson.ppf(0.9999, mean))
    obs = np.bincount(np.minimum(draws, hi), minlength=hi + 1)
    p = stats.poisson.pmf(np.arange(hi + 1), mean)
    p[-1] += stats.poisson.sf(hi, mean)
    keep = p * draws.size >= 5
    exp = np.append((p * draws.size)[keep], (p * draws.size)[~keep].sum())
    got = np.append(obs[keep], obs[~keep].sum())
    if exp[-1] == 0:
        exp, got = exp[:-1], got[:-1]
    assert stats.chisquare(got, exp * got.sum() / exp.sum()).pvalue > 1e-4


@given(st.floats(0, 1000), st.integers(0, 2 ** 32))
def test_sampler_is_seed_stable(mean, seed):
    a = poisson_variate(mean, UniformStream(seed))
    b = poisson_variate(mean, UniformStream(seed))
    assert a == b and a >= 0


def test_signature_covers_effective_span(flat_spec):
    shape = ProfileShape("gaussian", (40.0, 9.0, 12.0))
    sim = simulate(SimConfig(100, FLAT20, flat_spec, [(20, shape)], seed=1))
    sig = extract_signature(sim, 0)
    above = np.nonzero(sim.truth.delta > 0.05 * sim.truth.delta.max())[0] + 1
    assert sig.start == 20 and not sig.truncated
    assert set(above) <= set(sig.days)
    assert sig.days[-1] == above[-1] + 2
    with pytest.raises(IndexOutOfRange):
        extract_signature(sim, 1)


def test_signature_truncated_at_horizon(flat_spec):
    shape = ProfileShape("gaussian", (40.0, 9.0, 12.0))
    sim = simulate(SimConfig(30, FLAT20, flat_spec, [(20, shape)], seed=1))
    sig = extract_signature(sim, 0)
    assert sig.truncated and sig.days[-1] == 30
    assert sim.truth.outbreaks[0].truncated


@pytest.mark.parametrize("family", ["lognormal", "gaussian", "bimodal"])
def test_noiseless_round_trip(flat_spec, family):
    shape = ProfileShape(family, CENTRAL_THETA[Family(family)])
    sim = simulate(SimConfig(120, FLAT20, flat_spec, [(30, shape)], seed=0))
    noiseless = type(sim)(type(sim.series)(sim.series.start, np.round(sim.lambdas + sim.truth.delta)),
                          sim.lambdas, sim.truth)
    sig = extract_signature(noiseless, 0)
    fit = fit_theta(sig, family)
    d = shape.curve(sig.u)
    assert np.sqrt(np.mean((fit.curve(sig.u) - d) ** 2)) <= 0.05 * d.max()


def test_training_scenario_layout():
    tr = training_scenario("gaussian", 5)
    obs = tr.truth.outbreaks
    assert len(obs) == 30
    assert all(b.t_o > a.eff_end for a, b in zip(obs, obs[1:]))
    central = np.array(CENTRAL_THETA[Family.GAUSSIAN])
    for ob in obs:
        ratio = np.array(ob.shape.theta) / central
        assert np.all((ratio >= 0.75) & (ratio <= 1.25))


def test_files_round_trip(tmp_path):
    shape = ProfileShape("bimodal", (25.0, 5.0, 14.0, 8.0))
    sim = simulate(SimConfig(90, outbreaks=[(20, shape)], seed=4))
    path = tmp_path / "s.csv"
    write_counts(sim.series, path)
    write_truth(sim, *sidecar_paths(path))
    series = read_counts(path)
    truth, lam = read_truth(*sidecar_paths(path))
    np.testing.assert_array_equal(series.counts, sim.series.counts)
    np.testing.assert_array_equal(truth.delta, sim.truth.delta)
    np.testing.assert_array_equal(lam, sim.lambdas)
    assert truth.outbreaks == sim.truth.outbreaks
