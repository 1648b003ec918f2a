"""
Shot-to-shot fluctuation statistics by Monte Carlo.

Each sample perturbs the setpoint with Gaussian noise of relative standard
deviation epsilon. Two noise models are provided:
- independent: every coordinate gets its own normal deviate
- atom-number-preserving (two parameters): one deviate u per sample,
  x1 (1 + eps u) and x2 (1 - eps u), so x1 * x2 is preserved to first order
"""

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from core.exceptions import InvalidArgumentError, PoisonedSampleError
from core.sensitivity.criterion import CriterionFunction

logger = structlog.get_logger()

FluctuationMode = Literal["independent", "atom-number-preserving"]


class FluctuationSpec(BaseModel):
    """
    Noise model around a setpoint.

    Attributes:
        center: Setpoint X-bar
        epsilon: Relative standard deviation of the fluctuations
        n: Number of Monte Carlo samples
        seed: Mersenne Twister seed
        mode: independent | atom-number-preserving
        scale: Per-axis reference magnitude (defaults to |X-bar|)
    """
    model_config = ConfigDict(frozen=True)

    center: Tuple[float, ...]
    epsilon: float = 0.05
    n: int = 1000
    seed: int = 0
    mode: FluctuationMode = "independent"
    scale: Optional[Tuple[float, ...]] = None

    @field_validator("epsilon")
    @classmethod
    def _epsilon_non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"epsilon must be finite and >= 0, got {v}")
        return v

    @field_validator("n")
    @classmethod
    def _n_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"sample count must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def _scale_matches(self) -> "FluctuationSpec":
        if not self.center:
            raise ValueError("center must have at least one coordinate")
        if self.scale is not None and len(self.scale) != len(self.center):
            raise ValueError("scale must have one entry per coordinate")
        return self

    @property
    def dimension(self) -> int:
        return len(self.center)

    def reference_scale(self) -> np.ndarray:
        if self.scale is not None:
            return np.asarray(self.scale, dtype=float)
        return np.abs(np.asarray(self.center, dtype=float))


@dataclass(frozen=True)
class FluctuationReport:
    """Mean and population standard deviation of h over the samples."""
    mean: float
    std: float
    values: np.ndarray
    seed: int
    parameters: np.ndarray = field(repr=False)
    substreams: np.ndarray = field(repr=False)

    @property
    def variance(self) -> float:
        return self.std ** 2


def sample_fluctuations(spec: FluctuationSpec) -> np.ndarray:
    """
    Draw the fluctuating parameter vectors.

    Sample i takes the i-th block of deviates from a single Mersenne Twister
    stream seeded with spec.seed, so block i is its substream.

    Returns:
        Array of shape (spec.n, dimension)

    Raises:
        InvalidArgumentError: atom-number-preserving mode with dimension != 2
    """
    center = np.asarray(spec.center, dtype=float)
    spread = spec.epsilon * spec.reference_scale()
    rng = np.random.Generator(np.random.MT19937(spec.seed))

    if spec.mode == "atom-number-preserving":
        if spec.dimension != 2:
            raise InvalidArgumentError(
                f"atom-number-preserving fluctuations need exactly 2 parameters, got {spec.dimension}"
            )
        u = rng.standard_normal(spec.n)[:, None]
        signs = np.array([1.0, -1.0])
        return center + signs * spread * u

    u = rng.standard_normal((spec.n, spec.dimension))
    return center + spread * u


def fluctuation_stats(h: CriterionFunction, spec: FluctuationSpec) -> FluctuationReport:
    """
    Monte Carlo mean and standard deviation of h under the noise model.

    Raises:
        PoisonedSampleError: If h is non-finite at any sample
    """
    if h.dimension != spec.dimension:
        raise InvalidArgumentError(
            f"criterion dimension {h.dimension} does not match setpoint dimension {spec.dimension}"
        )
    X = sample_fluctuations(spec)
    values = h.evaluate_many(X)

    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise PoisonedSampleError(int(bad[0]), float(values[bad[0]]))

    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        mean, std = lo, 0.0
    else:
        # summation rounding can push the mean just outside the sample range
        mean = min(max(float(np.mean(values)), lo), hi)
        std = float(np.std(values))

    report = FluctuationReport(
        mean=mean,
        std=std,
        values=values,
        seed=spec.seed,
        parameters=X,
        substreams=np.arange(spec.n),
    )
    logger.info(
        "fluctuation_stats_computed",
        criterion=h.name,
        epsilon=spec.epsilon,
        samples=spec.n,
        mode=spec.mode,
        mean=report.mean,
        std=report.std,
    )
    return report


def fit_slope(epsilons: Sequence[float], sigmas: Sequence[float]) -> float:
    """
    Least-squares slope p of sigma = p * epsilon through the origin.

    Raises:
        InvalidArgumentError: On length mismatch, fewer than two points,
            negative or repeated epsilons, or all-zero epsilons
    """
    eps = np.asarray(epsilons, dtype=float)
    sig = np.asarray(sigmas, dtype=float)
    if eps.shape != sig.shape or eps.ndim != 1:
        raise InvalidArgumentError(f"epsilon and sigma lists must match, got {eps.shape} and {sig.shape}")
    if len(eps) < 2:
        raise InvalidArgumentError("slope fit needs at least two points")
    if np.any(eps < 0) or not np.all(np.isfinite(eps)) or not np.all(np.isfinite(sig)):
        raise InvalidArgumentError("epsilons must be finite and >= 0, sigmas finite")
    if len(np.unique(eps)) != len(eps):
        raise InvalidArgumentError("epsilons must be distinct")
    denom = float(np.dot(eps, eps))
    if denom == 0.0:
        raise InvalidArgumentError("slope undefined when every epsilon is zero")
    return float(np.dot(eps, sig) / denom)
