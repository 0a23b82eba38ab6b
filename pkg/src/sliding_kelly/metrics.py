"""Performance metrics computed from an account-value curve."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

TRADING_DAYS = 252


class MetricsError(ValueError):
    pass


class CurveTooShort(MetricsError):
    pass


class DegenerateVolatility(MetricsError):
    pass


@dataclass(frozen=True)
class MetricsSummary:
    cumulative_return: float
    realized_log_growth: float
    annualized_volatility: float
    sharpe_per_period: float | None
    sharpe_n_period: float | None
    sharpe_annualized: float | None
    max_drawdown: float
    n_periods: int
    risk_free_rate: float

    def to_dict(self) -> dict:
        return asdict(self)


def _values(curve) -> np.ndarray:
    v = np.asarray(getattr(curve, "values", curve), dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise CurveTooShort(f"need at least 2 account values, got {v.size}")
    return v


def per_period_returns(curve) -> np.ndarray:
    """R(k) = (V(k+1) - V(k)) / V(k)."""
    v = _values(curve)
    return (v[1:] - v[:-1]) / v[:-1]


def cumulative_return(curve) -> float:
    v = _values(curve)
    return float((v[-1] - v[0]) / v[0])


def realized_log_growth(curve) -> float:
    v = _values(curve)
    return float(math.log(v[-1] / v[0]))


def sharpe_ratio(returns: Sequence[float], risk_free: float = 0.0) -> tuple[float, float]:
    """Per-period and sqrt(N)-scaled Sharpe ratio of ``returns`` in excess of ``risk_free``.

    Uses the unbiased (N-1) standard deviation; r_f is subtracted once.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise CurveTooShort(f"need at least 2 returns, got {r.size}")
    excess = r - risk_free
    sd = float(np.std(excess, ddof=1))
    if sd == 0.0:
        raise DegenerateVolatility("excess returns have zero standard deviation")
    per_period = float(np.mean(excess)) / sd
    return per_period, math.sqrt(r.size) * per_period


def annualized_volatility(returns: Sequence[float], periods_per_year: int = TRADING_DAYS) -> float:
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise CurveTooShort(f"need at least 2 returns, got {r.size}")
    return float(np.std(r, ddof=1)) * math.sqrt(periods_per_year)


def max_drawdown(curve) -> float:
    """Largest relative peak-to-trough decline, via a single running-peak pass.

    Evaluated as ``1 - V(k) / peak``: in floating point this is monotone in the
    peak, so the running maximum equals the maximum over all earlier points.
    """
    v = _values(curve)
    peak = v[0]
    worst = 0.0
    for value in v[1:]:
        if value > peak:
            peak = value
        else:
            dd = 1.0 - value / peak
            if dd > worst:
                worst = dd
    return float(worst)


def summarize(curve, risk_free: float = 0.0) -> MetricsSummary:
    """All metrics for one curve; Sharpe fields are None when volatility is zero."""
    r = per_period_returns(curve)
    try:
        sr, sr_n = sharpe_ratio(r, risk_free)
        sr_ann: float | None = math.sqrt(TRADING_DAYS) * sr
    except (DegenerateVolatility, CurveTooShort):
        sr = sr_n = sr_ann = None
    vol = annualized_volatility(r) if r.size >= 2 else 0.0
    return MetricsSummary(
        cumulative_return=cumulative_return(curve),
        realized_log_growth=realized_log_growth(curve),
        annualized_volatility=vol,
        sharpe_per_period=sr,
        sharpe_n_period=sr_n,
        sharpe_annualized=sr_ann,
        max_drawdown=max_drawdown(curve),
        n_periods=int(r.size),
        risk_free_rate=float(risk_free),
    )
