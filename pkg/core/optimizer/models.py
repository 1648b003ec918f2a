"""
Optimizer settings and optimum records.
"""

import json
import math
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.control.envelopes import (
    ControlEnvelope,
    GaussianControl,
    SplineControl,
    gaussian_envelope,
    spline_envelope,
)
from core.memory.params import MemoryParams, SolverConfig

Bounds = Tuple[float, float]

ControlKind = Literal["gaussian", "spline"]

CacheKey = Tuple[float, float, str, int]


def _check_bounds(name: str, bounds: Bounds) -> Bounds:
    lo, hi = bounds
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"{name} bounds must be finite with min < max, got {bounds}")
    return bounds


class OptimizerConfig(BaseModel):
    """
    Settings shared by the Gaussian and shape optimizers.

    Attributes:
        restarts: Number of Nelder-Mead starts (heuristic starts first, then random)
        max_evals: Function-evaluation budget per start (iterations for shapes)
        param_tolerance: Relative parameter step below which a search stops (for the
            delay, relative to the width of delay_bounds)
        theta_bounds: Pulse area range in radians
        delay_bounds: Control delay range
        fwhm_bounds: Control FWHM range
        gradient_step: Relative step of the central finite differences
        seed: Mersenne Twister seed for the random starts
        solver: Solver configuration used for every efficiency evaluation
    """
    model_config = ConfigDict(frozen=True)

    restarts: int = 5
    max_evals: int = 400
    param_tolerance: float = 1e-4
    theta_bounds: Bounds = (0.05 * math.pi, 8.0 * math.pi)
    delay_bounds: Bounds = (-3.0, 4.0)
    fwhm_bounds: Bounds = (0.02, 5.0)
    gradient_step: float = 1e-3
    seed: int = 0
    solver: SolverConfig = Field(default_factory=SolverConfig)

    @field_validator("restarts")
    @classmethod
    def _restarts_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"restarts must be >= 1, got {v}")
        return v

    @field_validator("max_evals")
    @classmethod
    def _enough_evals(cls, v: int) -> int:
        if v < 10:
            raise ValueError(f"max_evals must be >= 10, got {v}")
        return v

    @field_validator("param_tolerance", "gradient_step")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"tolerances and steps must be finite and > 0, got {v}")
        return v

    @model_validator(mode="after")
    def _bounds_valid(self) -> "OptimizerConfig":
        _check_bounds("theta", self.theta_bounds)
        _check_bounds("delay", self.delay_bounds)
        _check_bounds("fwhm", self.fwhm_bounds)
        # log-parameterized axes need a positive lower bound
        if self.theta_bounds[0] <= 0 or self.fwhm_bounds[0] <= 0:
            raise ValueError("theta and fwhm lower bounds must be > 0")
        return self


class OptimumRecord(BaseModel):
    """
    Best control found for one memory point.

    Gaussian records carry params = (theta, delay, fwhm) and no knots; spline
    records carry the knot times and params = knot values.
    """
    model_config = ConfigDict(frozen=True)

    d: float
    g: float
    kind: ControlKind
    params: Tuple[float, ...]
    knots: Optional[Tuple[float, ...]] = None
    efficiency: float
    evaluations: int
    converged: bool

    @field_validator("efficiency")
    @classmethod
    def _efficiency_in_range(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"efficiency must be in [0, 1], got {v}")
        return v

    @model_validator(mode="after")
    def _shape_consistent(self) -> "OptimumRecord":
        if self.kind == "gaussian":
            if len(self.params) != 3 or self.knots is not None:
                raise ValueError("gaussian record needs params (theta, delay, fwhm) and no knots")
        elif self.knots is None or len(self.knots) != len(self.params):
            raise ValueError("spline record needs one knot per value")
        # validates the control's own invariants
        self.control()
        return self

    @property
    def memory(self) -> MemoryParams:
        return MemoryParams(d=self.d, g=self.g)

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def key(self) -> CacheKey:
        return (float(self.d), float(self.g), self.kind, self.n_params)

    def control(self):
        """GaussianControl or SplineControl held by this record."""
        if self.kind == "gaussian":
            return GaussianControl.from_vector(self.params)
        return SplineControl(knots=self.knots, values=self.params)

    def envelope(self) -> ControlEnvelope:
        ctrl = self.control()
        if isinstance(ctrl, GaussianControl):
            return gaussian_envelope(ctrl)
        return spline_envelope(ctrl)

    def to_json_line(self) -> str:
        # json.dumps writes floats as their shortest round-trip repr
        return json.dumps(self.model_dump(), separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "OptimumRecord":
        return cls.model_validate(json.loads(line))
