"""
Performance criteria h(X) over a parameter vector X.

Internal parameters (the memory point when X describes the control, or the
control when X describes the memory) are captured inside the criterion.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from core.control.envelopes import (
    DEFAULT_SPLINE_WINDOW,
    ControlEnvelope,
    GaussianEnvelope,
    SplineEnvelope,
    chebyshev_knots,
)
from core.memory.dynamics import simulate_batch, storage_efficiency
from core.memory.params import MemoryParams, SolverConfig

# Batch members per solver call; bounds the size of the sampled control array
DEFAULT_CHUNK_SIZE = 128

ScalarFunc = Callable[[np.ndarray], float]
BatchFunc = Callable[[np.ndarray], np.ndarray]


class CriterionFunction:
    """
    Deterministic scalar criterion of an N-dimensional parameter vector.

    Args:
        func: Single-point evaluation x -> h
        dimension: Length N of the parameter vector
        batch_func: Optional vectorized evaluation (n, N) -> (n,)
        chunk_size: Rows passed to batch_func per call
        name: Label used in logs and reports
    """

    def __init__(
        self,
        func: Optional[ScalarFunc],
        dimension: int,
        batch_func: Optional[BatchFunc] = None,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        name: str = "criterion",
    ):
        if func is None and batch_func is None:
            raise ValueError("criterion needs func or batch_func")
        if dimension < 1:
            raise ValueError(f"criterion dimension must be >= 1, got {dimension}")
        self.func = func
        self.dimension = dimension
        self.batch_func = batch_func
        self.chunk_size = chunk_size
        self.name = name

    def __call__(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return float(self.func(x))
        return float(self.batch_func(x[None, :])[0])

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate every row of X; the result order matches the rows."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension:
            raise ValueError(f"expected {self.dimension} columns, got {X.shape[1]}")
        if self.batch_func is None:
            return np.array([float(self.func(row)) for row in X])
        parts = [
            np.asarray(self.batch_func(X[start : start + self.chunk_size]), dtype=float)
            for start in range(0, len(X), self.chunk_size)
        ]
        return np.concatenate(parts) if parts else np.empty(0)

    def __repr__(self) -> str:
        return f"CriterionFunction(name={self.name!r}, dimension={self.dimension})"


# ============================================
# EFFICIENCY CRITERIA
# ============================================

def _efficiencies(memories, controls, cfg: SolverConfig) -> np.ndarray:
    outcomes = simulate_batch(memories, controls, cfg)
    return np.array([storage_efficiency(o) for o in outcomes])


def memory_criterion(ctrl: ControlEnvelope, cfg: SolverConfig) -> CriterionFunction:
    """Efficiency as a function of X = (d, g) with the control held fixed."""

    def batch(X: np.ndarray) -> np.ndarray:
        memories = [MemoryParams(d=float(row[0]), g=float(row[1])) for row in X]
        return _efficiencies(memories, [ctrl] * len(memories), cfg)

    return CriterionFunction(None, 2, batch_func=batch, name="efficiency(d, g)")


def gaussian_control_criterion(m: MemoryParams, cfg: SolverConfig) -> CriterionFunction:
    """Efficiency as a function of X = (theta, delay, fwhm) at a fixed memory point."""

    def batch(X: np.ndarray) -> np.ndarray:
        controls = []
        for theta, delay, fwhm in X:
            sigma = fwhm / (2.0 * np.sqrt(np.log(2.0)))
            peak = theta / (2.0 * np.sqrt(np.pi) * sigma)
            controls.append(GaussianEnvelope(peak=float(peak), center=float(delay), sigma=float(sigma)))
        return _efficiencies([m] * len(controls), controls, cfg)

    return CriterionFunction(None, 3, batch_func=batch, name="efficiency(theta, delay, fwhm)")


def shape_criterion(
    m: MemoryParams,
    knots: Optional[Sequence[float]] = None,
    cfg: Optional[SolverConfig] = None,
    n: Optional[int] = None,
    window: Tuple[float, float] = DEFAULT_SPLINE_WINDOW,
) -> CriterionFunction:
    """
    Efficiency as a function of the spline amplitudes X = (xi_1, ..., xi_N).

    Knots are taken as given, or built as N Chebyshev points over the window.
    """
    if knots is None:
        if n is None:
            raise ValueError("shape criterion needs knots or a knot count")
        knots = chebyshev_knots(n, window)
    knots = tuple(float(k) for k in knots)
    cfg = cfg or SolverConfig()

    def batch(X: np.ndarray) -> np.ndarray:
        controls = [
            SplineEnvelope(knots=knots, values=tuple(float(v) for v in np.maximum(row, 0.0)))
            for row in X
        ]
        return _efficiencies([m] * len(controls), controls, cfg)

    return CriterionFunction(None, len(knots), batch_func=batch, name=f"efficiency(xi_1..xi_{len(knots)})")
