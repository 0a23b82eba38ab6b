from datetime import date

import numpy as np
import pytest

from conftest import make_returns, synthetic_prices
from sliding_kelly.backtest import (
    EquityCurve,
    RunSpec,
    SplitOutOfRange,
    StageMismatch,
    run_backtest,
    simulate,
)
from sliding_kelly.market_data import PriceSeries, append_cash_asset, compute_returns
from sliding_kelly.metrics import summarize
from sliding_kelly.strategy import InsufficientData, constant_schedule, sliding_window_weights


def test_simulate_single_asset():
    curve = simulate(constant_schedule([1.0], 0, 2), make_returns([[0.1], [-0.1]]), 1.0)
    np.testing.assert_allclose(curve.values, [1.0, 1.1, 0.99], rtol=1e-15)
    assert curve.start_stage == 0


def test_all_cash_curve_is_flat():
    r = append_cash_asset(make_returns([[0.1], [-0.3], [0.2]]), 0.0)
    curve = simulate(constant_schedule([0.0, 1.0], 0, 3), r, 2.5)
    np.testing.assert_array_equal(curve.values, [2.5] * 4)


def test_vertex_schedule_tracks_normalized_price():
    prices = synthetic_prices(seed=3, n=120)
    r = compute_returns(prices)
    for i in range(3):
        e = np.eye(3)[i]
        curve = simulate(constant_schedule(e, 10, len(r) - 10), r, 1.0)
        expected = prices.prices[10:, i] / prices.prices[10, i]
        np.testing.assert_allclose(curve.values, expected, rtol=1e-10, atol=0)


def test_simulate_rejects_bad_stages():
    r = make_returns([[0.1, 0.0], [0.2, 0.0]])
    with pytest.raises(StageMismatch):
        simulate(constant_schedule([1.0, 0.0], 1, 2), r)
    with pytest.raises(StageMismatch):
        simulate(constant_schedule([1.0], 0, 2), r)
    with pytest.raises(ValueError):
        simulate(constant_schedule([1.0, 0.0], 0, 2), r, 0.0)


def test_curve_telescopes_and_stays_positive():
    rng = np.random.default_rng(0)
    r = make_returns(rng.uniform(-0.3, 0.4, size=(80, 3)))
    curve = simulate(sliding_window_weights(r, 6), r, 1.0)
    assert np.all(curve.values > 0)
    total = float(np.sum(curve.log_returns))
    assert abs(total - np.log(curve.values[-1] / curve.values[0])) <= 1e-10
    assert len(curve) == len(r) - 6 + 1


def test_equity_curve_rejects_nonpositive():
    with pytest.raises(ValueError):
        EquityCurve(0, [1.0, 0.0])


@pytest.fixture
def report(prices):
    return run_backtest(prices, RunSpec(split=date(2019, 2, 13)))


def test_report_layout(report, prices):
    names = [s.name for s in report.strategies]
    assert names == ["classical", "sliding_M5", "sliding_M10", "sliding_M30", "sliding_M60", "sliding_M100"]
    s = report.insample_returns
    assert prices.dates[s] <= date(2019, 2, 13) < prices.dates[s + 1]
    lengths = {len(x.curve) for x in report.strategies}
    starts = {x.schedule.start_stage for x in report.strategies}
    assert lengths == {len(prices) - s} and starts == {s}
    assert len(report.dates) == len(prices) - s
    for strat in report.strategies:
        assert strat.curve.values[0] == 1.0
        assert strat.runtime_secs >= 0
        again = summarize(strat.curve, 0.0)
        assert again == strat.metrics


def test_classical_is_insample_fit(report, prices):
    from sliding_kelly.strategy import classical_log_optimal

    r = compute_returns(prices)
    k = classical_log_optimal(r.head(report.insample_returns))
    np.testing.assert_array_equal(report.strategy("classical").schedule.weights[0], k)


def test_sliding_first_window_uses_insample_tail(report, prices):
    r = compute_returns(prices)
    s = report.insample_returns
    direct = sliding_window_weights(r, 10, first_stage=s)
    np.testing.assert_array_equal(report.strategy("sliding_M10").schedule.weights, direct.weights)


def test_report_is_deterministic(prices, report):
    again = run_backtest(prices, RunSpec(split=date(2019, 2, 13)))
    for a, b in zip(report.strategies, again.strategies):
        assert a.curve.values.tobytes() == b.curve.values.tobytes()
        assert a.schedule.weights.tobytes() == b.schedule.weights.tobytes()
        assert a.metrics == b.metrics


def test_single_asset_all_strategies_track_price():
    p = synthetic_prices(seed=2, n=80, assets=("ONLY",))
    rep = run_backtest(p, RunSpec(split=p.dates[40], windows=(3, 10)))
    expected = p.prices[40:, 0] / p.prices[40, 0]
    for strat in rep.strategies:
        np.testing.assert_allclose(strat.curve.values, expected, rtol=1e-10)


def test_split_errors(prices):
    with pytest.raises(SplitOutOfRange):
        run_backtest(prices, RunSpec(split=prices.dates[-1]))
    with pytest.raises(SplitOutOfRange):
        run_backtest(prices, RunSpec(split=date(2000, 1, 1)))
    with pytest.raises(SplitOutOfRange):
        run_backtest(prices, RunSpec(split=prices.dates[0], windows=(1,)))
    with pytest.raises(InsufficientData):
        run_backtest(prices, RunSpec(split=prices.dates[20], windows=(30,)))


def test_cash_rate_adds_column(prices):
    rep = run_backtest(prices, RunSpec(split=date(2019, 2, 13), windows=(10,), cash_rate=0.0))
    assert rep.assets[-1] == "CASH"
    assert rep.strategy("sliding_M10").schedule.weights.shape[1] == 4


def test_runspec_validation():
    with pytest.raises(ValueError):
        RunSpec(split=date(2019, 1, 1), windows=(5, 5))
    with pytest.raises(ValueError):
        RunSpec(split=date(2019, 1, 1), windows=(0,))
    with pytest.raises(ValueError):
        RunSpec(split=date(2019, 1, 1), v0=0)
