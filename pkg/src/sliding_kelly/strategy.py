"""Weight schedules: sliding-window log-optimal, classical fixed weight, constants."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .market_data import ReturnSeries, ReturnWindow, slice_window
from .solver import DidNotConverge, SolverConfig, check_weights, solve_log_optimal


class InsufficientData(ValueError):
    pass


class StageDidNotConverge(DidNotConverge):
    def __init__(self, stage: int, inner: DidNotConverge):
        self.stage = stage
        super().__init__(inner.result, f"stage {stage}: {inner}")


@dataclass(frozen=True)
class WeightSchedule:
    """``weights[t]`` is applied to return x(start_stage + t).

    ``gaps`` and ``iterations`` are the per-entry solver diagnostics; constant
    schedules report zero for both.
    """

    start_stage: int
    weights: np.ndarray
    gaps: np.ndarray = field(default=None)  # type: ignore[assignment]
    iterations: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] < 1:
            raise ValueError(f"schedule needs at least one weight row, got shape {w.shape}")
        for row in w:
            check_weights(row)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        n = w.shape[0]
        gaps = np.zeros(n) if self.gaps is None else np.array(self.gaps, dtype=float)
        its = np.zeros(n, dtype=int) if self.iterations is None else np.array(self.iterations, dtype=int)
        if gaps.shape != (n,) or its.shape != (n,):
            raise ValueError("diagnostics must have one entry per schedule row")
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "iterations", its)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def end_stage(self) -> int:
        """Last stage (inclusive) with a weight."""
        return self.start_stage + len(self) - 1

    @property
    def stages(self) -> range:
        return range(self.start_stage, self.end_stage + 1)


def sliding_window_weights(
    returns: ReturnSeries,
    window: int,
    config: SolverConfig | None = None,
    first_stage: int | None = None,
) -> WeightSchedule:
    """Re-solve the log-optimal problem on the last ``window`` returns at every stage.

    The weight for stage k uses x(k-window), ..., x(k-1) only and is applied to
    x(k). Stages run from ``first_stage`` (default ``window``) to the last
    return.
    """
    cfg = config or SolverConfig()
    n = len(returns)
    if window < 1:
        raise InsufficientData(f"window size must be >= 1, got {window}")
    if n < window + 1:
        raise InsufficientData(f"window {window} needs at least {window + 1} returns, got {n}")
    start = window if first_stage is None else first_stage
    if start < window or start > n - 1:
        raise InsufficientData(
            f"first stage {start} outside the feasible range {window}..{n - 1}"
        )

    weights, gaps, iterations = [], [], []
    for k in range(start, n):
        try:
            result = solve_log_optimal(slice_window(returns, k, window), cfg)
        except DidNotConverge as exc:
            raise StageDidNotConverge(k, exc) from exc
        weights.append(result.weights)
        gaps.append(result.gap)
        iterations.append(result.iterations)
    return WeightSchedule(start, np.array(weights), np.array(gaps), np.array(iterations))


def classical_log_optimal(
    insample: ReturnSeries, config: SolverConfig | None = None
) -> np.ndarray:
    """Single solve over the whole in-sample set, each return weighted equally."""
    if len(insample) < 1:
        raise InsufficientData("in-sample return set is empty")
    return solve_log_optimal(ReturnWindow(insample.returns), config).weights


def constant_schedule(weights, start_stage: int, length: int) -> WeightSchedule:
    if length < 1:
        raise ValueError(f"schedule length must be >= 1, got {length}")
    k = check_weights(weights)
    return WeightSchedule(start_stage, np.tile(k, (length, 1)))
