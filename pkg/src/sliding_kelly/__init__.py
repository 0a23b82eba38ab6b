"""Sliding-window log-optimal (Kelly) portfolio backtesting."""

from .backtest import BacktestReport, EquityCurve, RunSpec, run_backtest, simulate
from .market_data import (
    PriceSeries,
    ReturnSeries,
    ReturnWindow,
    append_cash_asset,
    compute_returns,
    flip_prices,
    load_price_csv,
    slice_window,
)
from .metrics import MetricsSummary, summarize
from .solver import SolveResult, SolverConfig, solve_log_optimal
from .strategy import (
    WeightSchedule,
    classical_log_optimal,
    constant_schedule,
    sliding_window_weights,
)

__all__ = [
    "BacktestReport",
    "EquityCurve",
    "MetricsSummary",
    "PriceSeries",
    "ReturnSeries",
    "ReturnWindow",
    "RunSpec",
    "SolveResult",
    "SolverConfig",
    "WeightSchedule",
    "append_cash_asset",
    "classical_log_optimal",
    "compute_returns",
    "constant_schedule",
    "flip_prices",
    "load_price_csv",
    "run_backtest",
    "simulate",
    "sliding_window_weights",
    "slice_window",
    "solve_log_optimal",
    "summarize",
]
