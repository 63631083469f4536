"""Prediction recursion, post-sample scoring, seasonal preprocessing."""

import numpy as np
import pytest

from bandedvar import (
    BandedMatrix,
    BandedVarModel,
    FitSpec,
    TimeSeries,
    deseasonalize,
    fit_banded_var,
    gen_coeff_uniform,
    predict,
    rolling_evaluation,
    simulate_var,
)
from bandedvar.rng import substream


def zero_model(p):
    return BandedVarModel(p, 1, 0, [BandedMatrix.zeros(p, 0)], np.eye(p))


def stationary_model(p, k0, seed, norm=None):
    a = gen_coeff_uniform(p, k0, substream(seed, "coeffs"), target_norm=norm)
    return BandedVarModel(p, 1, k0, [a], np.eye(p))


class TestPredict:
    def test_zero_model_predicts_offset(self):
        history = substream(0, "x").standard_normal((3, 10))
        assert np.array_equal(predict(zero_model(3), history, 2), np.zeros((3, 2)))
        mean = np.array([1.0, -2.0, 3.0])
        out = predict(zero_model(3), history, 2, mean=mean)
        assert np.allclose(out, np.column_stack([mean, mean]))

    def test_two_step_is_squared_matrix(self):
        model = stationary_model(5, 1, 1, norm=0.9)
        a = model.coeffs[0].to_dense()
        history = substream(1, "x").standard_normal((5, 4))
        out = predict(model, history, 2)
        assert np.allclose(out[:, 1], a @ a @ history[:, -1], atol=1e-12)

    def test_scalar_halving(self):
        coeff = BandedMatrix.from_dense(np.array([[0.5]]), 0)
        model = BandedVarModel(1, 1, 0, [coeff], np.eye(1))
        out = predict(model, np.array([[4.0]]), 2)
        assert np.allclose(out, [[2.0, 1.0]])

    def test_insufficient_history(self):
        model = BandedVarModel(2, 3, 0, [BandedMatrix.zeros(2, 0)] * 3)
        with pytest.raises(ValueError, match="history"):
            predict(model, np.zeros((2, 2)), 1)

    def test_overflowing_recursion_rejected(self):
        coeff = BandedMatrix.from_dense(np.array([[4.0]]), 0)
        model = BandedVarModel(1, 1, 0, [coeff], np.eye(1))
        with np.errstate(over="ignore"), pytest.raises(ValueError, match="finite"):
            predict(model, np.array([[1e300]]), h=20)

    def test_linear_in_history(self):
        model = stationary_model(4, 1, 2)
        history = substream(2, "x").standard_normal((4, 6))
        one = predict(model, history, 3)
        two = predict(model, 2.5 * history, 3)
        assert np.allclose(two, 2.5 * one, atol=1e-10)

    def test_second_order_recursion(self):
        a1 = BandedMatrix.from_dense(0.4 * np.eye(2), 0)
        a2 = BandedMatrix.from_dense(0.2 * np.eye(2), 0)
        model = BandedVarModel(2, 2, 0, [a1, a2])
        hist = np.array([[1.0, 0.0], [2.0, 1.0]])  # p x 2: y_0=(1,2), y_1=(0,1)
        out = predict(model, hist, 2)
        step1 = 0.4 * hist[:, 1] + 0.2 * hist[:, 0]
        step2 = 0.4 * step1 + 0.2 * hist[:, 1]
        assert np.allclose(out[:, 0], step1)
        assert np.allclose(out[:, 1], step2)


class TestRollingEvaluation:
    def test_perfect_model_zero_errors(self):
        model = stationary_model(4, 1, 3, norm=0.9)
        a = model.coeffs[0].to_dense()
        vals = np.empty((4, 40))
        vals[:, 0] = substream(3, "x").standard_normal(4)
        for t in range(1, 40):
            vals[:, t] = a @ vals[:, t - 1]
        report = rolling_evaluation(
            TimeSeries(vals), holdout=5, h_max=2, model=model
        )
        for h in (1, 2):
            assert report.errors[h].max() < 1e-10

    def test_white_noise_zero_model_matches_folded_normal(self):
        vals = substream(4, "wn").standard_normal((50, 300))
        report = rolling_evaluation(
            TimeSeries(vals), holdout=30, h_max=1, model=zero_model(50)
        )
        mean_abs = report.summary[1][0]
        assert abs(mean_abs - 0.7979) < 0.05

    def test_two_step_harder_than_one_step(self):
        wins = 0
        for rep in range(20):
            model = stationary_model(10, 1, 500 + rep)
            ts = simulate_var(model, 330, rng=substream(500 + rep, "innovations"))
            report = rolling_evaluation(
                ts, FitSpec(k=1, demean=False), holdout=30, h_max=2
            )
            wins += report.summary[2][0] >= report.summary[1][0]
        assert wins / 20 >= 0.8

    def test_single_point_holdout_equals_direct_predict(self):
        model = stationary_model(6, 1, 6)
        ts = simulate_var(model, 120, rng=substream(6, "innovations"))
        report = rolling_evaluation(
            ts, FitSpec(k=1, demean=False), holdout=1, h_max=1
        )
        train = ts.window(0, ts.n - 1)
        refit = fit_banded_var(train, 1)
        direct = predict(refit.model, train, 1)[:, 0]
        manual = np.abs(direct - ts.values[:, -1])
        assert np.allclose(report.errors[1][:, 0], manual, atol=1e-12)

    def test_summary_recomputable_and_squared_metric(self):
        model = stationary_model(5, 1, 7)
        ts = simulate_var(model, 150, rng=substream(7, "innovations"))
        report = rolling_evaluation(
            ts, FitSpec(k=1, demean=False), holdout=10, h_max=2, metric="squared"
        )
        stored = dict(report.summary)
        assert report.recompute_summary() == stored
        assert np.all(report.errors[1] >= 0.0)

    def test_refit_changes_nothing_on_fixed_spec_but_runs(self):
        model = stationary_model(4, 1, 8)
        ts = simulate_var(model, 140, rng=substream(8, "innovations"))
        fixed = rolling_evaluation(ts, FitSpec(k=1, demean=False), holdout=4, h_max=1)
        refit = rolling_evaluation(
            ts, FitSpec(k=1, demean=False), holdout=4, h_max=1, refit=True
        )
        assert fixed.errors[1].shape == refit.errors[1].shape
        assert not np.array_equal(fixed.errors[1], refit.errors[1])

    def test_degenerate_window_rejected(self):
        ts = TimeSeries(np.zeros((2, 10)))
        with pytest.raises(ValueError, match="degenerate|short"):
            rolling_evaluation(ts, FitSpec(k=0, demean=False), holdout=9, h_max=1)


class TestDeseasonalize:
    def test_period_one_is_demeaning(self):
        ts = TimeSeries(substream(9, "x").standard_normal((4, 30)) + 5.0)
        adjusted, seasonal = deseasonalize(ts, 1)
        assert seasonal.shape == (4, 1)
        assert np.allclose(adjusted.values, ts.values - ts.values.mean(axis=1, keepdims=True))

    def test_exactly_periodic_input_vanishes(self):
        base = np.array([1.0, -2.0, 3.0, 0.5])
        vals = np.tile(base, (2, 5))
        adjusted, _ = deseasonalize(TimeSeries(vals), 4)
        assert np.abs(adjusted.values).max() < 1e-12

    def test_sinusoid_phase_means_vanish(self):
        t = np.arange(52 * 6)
        vals = np.vstack(
            [
                10 * np.sin(2 * np.pi * t / 52),
                3 * np.cos(2 * np.pi * t / 52),
            ]
        ) + substream(10, "noise").standard_normal((2, len(t)))
        adjusted, _ = deseasonalize(TimeSeries(vals), 52)
        phases = np.arange(len(t)) % 52
        for s in range(52):
            assert np.abs(adjusted.values[:, phases == s].mean(axis=1)).max() < 1e-12

    def test_re_adding_reproduces_input(self):
        ts = TimeSeries(substream(11, "x").standard_normal((3, 40)))
        adjusted, seasonal = deseasonalize(ts, 7)
        phases = np.arange(40) % 7
        assert np.allclose(adjusted.values + seasonal[:, phases], ts.values, atol=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError, match="period"):
            deseasonalize(TimeSeries(np.zeros((2, 5))), 10)
