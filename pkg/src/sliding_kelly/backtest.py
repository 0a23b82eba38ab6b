"""Account-value simulation and full classical-vs-sliding experiment runs."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .market_data import PriceSeries, ReturnSeries, append_cash_asset, compute_returns
from .metrics import MetricsSummary, summarize
from .solver import SolverConfig
from .strategy import (
    InsufficientData,
    WeightSchedule,
    classical_log_optimal,
    constant_schedule,
    sliding_window_weights,
)


class StageMismatch(ValueError):
    pass


class SplitOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class EquityCurve:
    """Account values V(start_stage), ..., V(start_stage + len - 1)."""

    start_stage: int
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1 or np.any(~(v > 0)):
            raise ValueError("account values must be a non-empty positive vector")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def log_returns(self) -> np.ndarray:
        """g(k) = log(V(k+1) / V(k))."""
        return np.log(self.values[1:] / self.values[:-1])

    def __len__(self) -> int:
        return self.values.size


def simulate(schedule: WeightSchedule, returns: ReturnSeries, v0: float = 1.0) -> EquityCurve:
    """V(k+1) = (1 + K(k) @ x(k)) V(k) over the scheduled stages, from V(start) = v0."""
    if not v0 > 0:
        raise ValueError(f"initial value must be positive, got {v0}")
    if schedule.start_stage < 0 or schedule.end_stage > len(returns) - 1:
        raise StageMismatch(
            f"schedule stages {schedule.start_stage}..{schedule.end_stage} "
            f"outside return stages 0..{len(returns) - 1}"
        )
    if schedule.weights.shape[1] != returns.n_assets:
        raise StageMismatch(
            f"schedule has {schedule.weights.shape[1]} assets, returns have {returns.n_assets}"
        )
    x = returns.returns[schedule.start_stage : schedule.end_stage + 1]
    growth = 1.0 + np.einsum("ij,ij->i", schedule.weights, x)
    values = np.empty(len(schedule) + 1)
    values[0] = v0
    # sequential product keeps V(k+1) = growth(k) * V(k) exact per step
    for t, g in enumerate(growth):
        values[t + 1] = g * values[t]
    return EquityCurve(schedule.start_stage, values)


@dataclass(frozen=True)
class RunSpec:
    """One experiment: fit in-sample up to ``split`` (inclusive), trade afterwards."""

    split: date
    windows: tuple[int, ...] = (5, 10, 30, 60, 100)
    risk_free: float = 0.0
    v0: float = 1.0
    cash_rate: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "windows", tuple(int(w) for w in self.windows))
        if any(w < 1 for w in self.windows):
            raise ValueError("window sizes must be positive")
        if len(set(self.windows)) != len(self.windows):
            raise ValueError("window sizes must be distinct")
        if not self.v0 > 0:
            raise ValueError("v0 must be positive")


@dataclass(frozen=True)
class StrategyResult:
    name: str
    window: int | None
    schedule: WeightSchedule
    curve: EquityCurve
    metrics: MetricsSummary
    runtime_secs: float


@dataclass(frozen=True)
class BacktestReport:
    spec: RunSpec
    assets: tuple[str, ...]
    dates: tuple[date, ...]
    """Calendar date of every account value (shared by all strategies)."""
    weight_dates: tuple[date, ...]
    """Date each schedule row is chosen on (the start of the period it covers)."""
    insample_returns: int
    strategies: tuple[StrategyResult, ...]

    def strategy(self, name: str) -> StrategyResult:
        for s in self.strategies:
            if s.name == name:
                return s
        raise KeyError(name)


def split_stage(returns: ReturnSeries, prices: PriceSeries, split: date) -> int:
    """First out-of-sample stage: the index of the last price dated on or before ``split``."""
    idx = [k for k, d in enumerate(prices.dates) if d <= split]
    if not idx:
        raise SplitOutOfRange(f"split {split} precedes the first price date {prices.dates[0]}")
    s = idx[-1]
    if s < 1:
        raise SplitOutOfRange(f"split {split} leaves no in-sample returns")
    if s > len(returns) - 1:
        raise SplitOutOfRange(f"split {split} leaves no out-of-sample stages")
    return s


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, round(time.perf_counter() - t0, 3)


def run_backtest(prices: PriceSeries, spec: RunSpec) -> BacktestReport:
    """Classical baseline plus one sliding-window strategy per window size.

    All strategies are scored over the same out-of-sample stages; each sliding
    strategy's first window is the last ``M`` in-sample returns.
    """
    returns = compute_returns(prices)
    if spec.cash_rate is not None:
        returns = append_cash_asset(returns, spec.cash_rate)
    s = split_stage(returns, prices, spec.split)
    n_out = len(returns) - s
    too_long = [w for w in spec.windows if w > s]
    if too_long:
        raise InsufficientData(
            f"windows {too_long} exceed the {s} in-sample returns available before the split"
        )

    results = []

    def classical():
        weights = classical_log_optimal(returns.head(s), spec.solver)
        sched = constant_schedule(weights, s, n_out)
        return sched, simulate(sched, returns, spec.v0)

    (sched, curve), secs = _timed(classical)
    results.append(
        StrategyResult("classical", None, sched, curve, summarize(curve, spec.risk_free), secs)
    )

    for m in spec.windows:
        def sliding(m=m):
            sched = sliding_window_weights(returns, m, spec.solver, first_stage=s)
            return sched, simulate(sched, returns, spec.v0)

        (sched, curve), secs = _timed(sliding)
        results.append(
            StrategyResult(f"sliding_M{m}", m, sched, curve, summarize(curve, spec.risk_free), secs)
        )

    return BacktestReport(
        spec=spec,
        assets=returns.assets,
        dates=prices.dates[s:],
        weight_dates=returns.dates[s:],
        insample_returns=s,
        strategies=tuple(results),
    )
