"""Expected log-growth maximization over the unit simplex.

The objective ``f(K) = mean_j log(1 + K @ x_j)`` is concave, so projected
gradient ascent converges to a global maximizer and the linear-maximization
(Frank-Wolfe) gap ``max_i grad_i - K @ grad`` bounds the distance to the
optimal value from above.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .market_data import ReturnWindow

SIMPLEX_SUM_TOL = 1e-12

# bounds on the spectral trial step
_STEP_MIN = 1e-12
_STEP_MAX = 1e12


class SolverError(ValueError):
    pass


class NonViableReturn(SolverError):
    """Some scenario would wipe out the account (1 + K @ x <= 0)."""


class InvalidWindow(SolverError):
    pass


class DidNotConverge(SolverError):
    """Iteration budget exhausted; ``result`` holds the best iterate and its gap."""

    def __init__(self, result: "SolveResult", message: str | None = None):
        self.result = result
        super().__init__(
            message
            or f"gap {result.gap:.3e} after {result.iterations} iterations"
        )


@dataclass(frozen=True)
class SolverConfig:
    gap_tolerance: float = 1e-9
    max_iterations: int = 10_000
    shrink: float = 0.5
    initial_step: float = 1.0

    def __post_init__(self) -> None:
        if not self.gap_tolerance >= 0:
            raise ValueError("gap_tolerance must be nonnegative")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")


@dataclass(frozen=True)
class SolveResult:
    weights: np.ndarray
    objective: float
    gap: float
    iterations: int
    converged: bool


def check_weights(weights: np.ndarray) -> np.ndarray:
    """Validate that ``weights`` lies on the unit simplex; return it as a float array."""
    k = np.asarray(weights, dtype=float)
    if k.ndim != 1 or k.size < 1:
        raise ValueError(f"weights must be a non-empty vector, got shape {k.shape}")
    if not np.all(np.isfinite(k)) or np.any(k < 0) or np.any(k > 1):
        raise ValueError(f"weights must lie in [0, 1]: {k}")
    if abs(k.sum() - 1.0) > SIMPLEX_SUM_TOL:
        raise ValueError(f"weights must sum to 1, sum is {k.sum()!r}")
    return k


def _rows(window: ReturnWindow | np.ndarray) -> np.ndarray:
    if isinstance(window, ReturnWindow):
        return window.rows
    return ReturnWindow(window).rows


def _growth_factors(weights: np.ndarray, rows: np.ndarray) -> np.ndarray:
    if weights.shape != (rows.shape[1],):
        raise InvalidWindow(
            f"weights of length {weights.shape} do not match {rows.shape[1]} assets"
        )
    wealth = 1.0 + rows @ weights
    if np.any(wealth <= 0):
        raise NonViableReturn(f"1 + K @ x reaches {wealth.min()!r}")
    return wealth


def _objective(weights: np.ndarray, rows: np.ndarray) -> float:
    return float(np.mean(np.log(_growth_factors(weights, rows))))


def _gradient(weights: np.ndarray, rows: np.ndarray) -> np.ndarray:
    wealth = _growth_factors(weights, rows)
    return (rows / wealth[:, None]).mean(axis=0)


def _fw_gap(weights: np.ndarray, grad: np.ndarray) -> float:
    return max(float(grad.max() - weights @ grad), 0.0)


def log_growth_objective(weights, window) -> float:
    """Mean of log(1 + K @ x_j) over the window rows."""
    return _objective(check_weights(weights), _rows(window))


def log_growth_gradient(weights, window) -> np.ndarray:
    """Gradient ``mean_j x_j / (1 + K @ x_j)``."""
    return _gradient(check_weights(weights), _rows(window))


def optimality_gap(weights, window) -> float:
    """Upper bound on ``max_simplex f - f(weights)``."""
    k = check_weights(weights)
    return _fw_gap(k, _gradient(k, _rows(window)))


def project_to_simplex(v) -> np.ndarray:
    """Euclidean projection onto {K >= 0, sum K = 1} by sorting and thresholding."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1 or not np.all(np.isfinite(v)):
        raise ValueError("expected a non-empty finite vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.clip(v - theta, 0.0, 1.0)


def solve_log_optimal(
    window,
    config: SolverConfig | None = None,
    callback: Callable[[np.ndarray], None] | None = None,
) -> SolveResult:
    """Maximize expected log-growth over the simplex, starting from uniform weights.

    Each iteration takes a projected gradient step whose trial length is the
    Barzilai-Borwein estimate of the local curvature (``initial_step`` on the
    first iteration), shrunk until the quadratic sufficient-ascent test holds.
    Accepted steps therefore never decrease the objective.

    ``callback`` is invoked with every accepted iterate, the start included.

    Raises ``DidNotConverge`` if the gap is still above tolerance after
    ``max_iterations``; the exception carries the best iterate.
    """
    cfg = config or SolverConfig()
    try:
        rows = _rows(window)
    except ValueError as exc:
        raise InvalidWindow(str(exc)) from exc
    m = rows.shape[1]

    k = np.full(m, 1.0 / m)
    wealth = _growth_factors(k, rows)
    grad = (rows / wealth[:, None]).mean(axis=0)
    gap = _fw_gap(k, grad)
    if callback is not None:
        callback(k)
    step = cfg.initial_step
    iterations = 0

    while gap > cfg.gap_tolerance and iterations < cfg.max_iterations:
        iterations += 1
        while True:
            cand = project_to_simplex(k + step * grad)
            d = cand - k
            dd = float(d @ d)
            if dd == 0.0:
                break
            # objective change without cancellation between two nearby values
            ratio = (rows @ d) / wealth
            if np.all(ratio > -1.0):
                gain = float(np.mean(np.log1p(ratio)))
                if gain >= float(grad @ d) - dd / (2.0 * step):
                    break
            step *= cfg.shrink
            if step < _STEP_MIN:
                dd = 0.0
                break
        if dd == 0.0:
            # no representable ascent direction left
            break
        wealth = _growth_factors(cand, rows)
        grad_cand = (rows / wealth[:, None]).mean(axis=0)
        curvature = -float(d @ (grad_cand - grad))
        step = dd / curvature if curvature > 0 else _STEP_MAX
        step = min(max(step, _STEP_MIN), _STEP_MAX)
        k, grad = cand, grad_cand
        gap = _fw_gap(k, grad)
        if callback is not None:
            callback(k)

    converged = gap <= cfg.gap_tolerance
    result = SolveResult(
        weights=k,
        objective=_objective(k, rows),
        gap=gap,
        iterations=iterations,
        converged=converged,
    )
    if not converged:
        raise DidNotConverge(result)
    return result
