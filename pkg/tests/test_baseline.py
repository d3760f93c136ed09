import datetime as dt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize

from mlrss.baseline import (CONTEST_SPEC, BaselineModel, CalendarDay, DesignSpec, build_design_row,
                            calendar_days, fit_baseline, fit_poisson_irls, predict_lambda, series_design)
from mlrss.errors import DegenerateResponse, NotConvergedWarning, Overflow, SingularDesign
from mlrss.series import CountSeries
from mlrss.simulator import DEFAULT_BETA, SimConfig, simulate


def test_design_row_at_phase_zero():
    spec = DesignSpec((1, 2), (1,), True)
    row = build_design_row(CalendarDay(1, True, 0.0), spec)
    np.testing.assert_allclose(row, [1, 1, 0, 1, 0, 1, 0, 1], atol=1e-15)


def test_design_row_quarter_phase_weekend():
    spec = DesignSpec((1,), (), True)
    row = build_design_row(CalendarDay(1, False, 0.25), spec)
    np.testing.assert_allclose(row, [1, 0, 1, 0], atol=1e-15)


def test_contest_spec_has_sixteen_columns():
    assert CONTEST_SPEC.n_columns == 16
    assert build_design_row(CalendarDay(1, True, 0.3), CONTEST_SPEC).shape == (16,)
    assert CONTEST_SPEC.column_names[-2:] == ["weekday:sin2", "weekday:cos2"]


def test_interactions_must_be_subset():
    with pytest.raises(ValueError):
        DesignSpec((1, 2), (4,))


@given(st.floats(0, 1, exclude_max=True), st.booleans())
def test_design_row_is_periodic(f, weekday):
    a = build_design_row(CalendarDay(1, weekday, f), CONTEST_SPEC)
    b = build_design_row(CalendarDay(1, weekday, f + 1.0), CONTEST_SPEC)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_weekend_is_saturday_sunday():
    # 2001-01-06 is a Saturday
    series = CountSeries(dt.date(2001, 1, 1), np.ones(7, dtype=int))
    flags = [d.weekday for d in calendar_days(series, CONTEST_SPEC)]
    assert flags == [True] * 5 + [False] * 2


def test_constant_series_recovers_log_mean(flat_spec):
    spec = DesignSpec((), (), True)
    model = fit_baseline(CountSeries(dt.date(2001, 1, 1), np.full(70, 7)), spec)
    assert model.converged
    np.testing.assert_allclose(model.beta, [np.log(7), 0.0], atol=1e-8)


def test_all_zero_series_is_degenerate(flat_spec):
    with pytest.raises(DegenerateResponse):
        fit_baseline(CountSeries(dt.date(2001, 1, 1), np.zeros(40, dtype=int)), flat_spec)


def test_collinear_design_is_singular():
    X = np.column_stack([np.ones(50), np.ones(50), np.arange(50) / 50])
    with pytest.raises(SingularDesign):
        fit_poisson_irls(X, np.arange(50) % 7 + 1)


def test_iteration_cap_warns_and_returns_model():
    sim = simulate(SimConfig(400, seed=3))
    with pytest.warns(NotConvergedWarning):
        model = fit_baseline(sim.series, CONTEST_SPEC, max_iter=1)
    assert not model.converged


def test_predict_constant_models(flat_spec):
    days = [CalendarDay(t, t % 7 < 5, (t / 365.25) % 1) for t in range(1, 20)]
    np.testing.assert_allclose(predict_lambda(BaselineModel(np.array([np.log(10), 0.0]), flat_spec), days), 10)
    np.testing.assert_array_equal(predict_lambda(BaselineModel(np.zeros(16), CONTEST_SPEC), days), 1.0)


def test_predict_overflow():
    with pytest.raises(Overflow):
        predict_lambda(BaselineModel(np.array([1000.0, 0.0]), DesignSpec((), ())), [CalendarDay(1, True, 0.0)])


@pytest.fixture(scope="module")
def three_year_fit():
    sim = simulate(SimConfig(3 * 365, seed=11))
    return sim, fit_baseline(sim.series, CONTEST_SPEC)


def test_recovers_simulated_baseline(three_year_fit):
    sim, model = three_year_fit
    mape = np.mean(np.abs(model.lambdas(sim.series) - sim.lambdas) / sim.lambdas)
    assert mape < 0.05


def test_deviance_never_increases(three_year_fit):
    hist = np.array(three_year_fit[1].deviance_history)
    assert np.all(np.diff(hist) <= 1e-10)


def test_score_equations_hold(three_year_fit):
    sim, model = three_year_fit
    X = series_design(sim.series, CONTEST_SPEC)
    lam = model.lambdas(sim.series)
    assert np.all(np.abs(X.T @ (sim.series.counts - lam)) < 1e-6 * lam.sum())


def test_predict_reproduces_fitted_means(three_year_fit):
    sim, model = three_year_fit
    np.testing.assert_array_equal(model.lambdas(sim.series), model.fitted)


def test_matches_direct_likelihood_maximisation(three_year_fit):
    sim, model = three_year_fit
    X = series_design(sim.series, CONTEST_SPEC)
    y = sim.series.counts

    def nll(b):
        eta = X @ b
        return np.sum(np.exp(eta) - y * eta), X.T @ (np.exp(eta) - y)

    res = minimize(nll, np.r_[np.log(y.mean()), np.zeros(15)], jac=True, method="BFGS",
                   options={"gtol": 1e-8, "maxiter": 5000})
    np.testing.assert_allclose(model.beta, res.x, atol=1e-5)


def test_permutation_invariance():
    sim = simulate(SimConfig(2 * 365, seed=5))
    X = series_design(sim.series, CONTEST_SPEC)
    y = sim.series.counts
    perm = np.random.default_rng(0).permutation(y.size)
    b1, *_ = fit_poisson_irls(X, y)
    b2, *_ = fit_poisson_irls(X[perm], y[perm])
    np.testing.assert_allclose(b1, b2, rtol=0, atol=1e-8)


def test_mask_excludes_days():
    sim = simulate(SimConfig(400, seed=2))
    counts = sim.series.counts.copy()
    counts[100:120] += 500
    spiked = CountSeries(sim.series.start, counts)
    mask = np.ones(400, dtype=bool)
    mask[100:120] = False
    clean = fit_baseline(sim.series, CONTEST_SPEC, mask=mask)
    masked = fit_baseline(spiked, CONTEST_SPEC, mask=mask)
    np.testing.assert_allclose(clean.beta, masked.beta, atol=1e-12)


def test_model_file_round_trip(tmp_path, three_year_fit):
    model = three_year_fit[1]
    model.save(tmp_path / "b.json")
    back = BaselineModel.load(tmp_path / "b.json")
    np.testing.assert_array_equal(back.beta, model.beta)
    assert back.spec == model.spec


def test_default_beta_matches_contest_spec():
    assert DEFAULT_BETA.size == CONTEST_SPEC.n_columns
