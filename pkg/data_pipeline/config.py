"""
Sweep configuration.

A sweep visits every (d, g) point of a log-spaced grid and runs one analysis
kind there. The configuration is a single JSON document; a manifest written by
a previous run embeds it under "config" and is accepted as well.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.memory.params import SolverConfig
from core.optimizer.models import OptimizerConfig
from core.sensitivity.fluctuations import FluctuationMode

AnalysisKind = Literal["optimize", "fluctuations", "oat", "sobol", "shape-oat", "fidelity", "slopes"]

ANALYSIS_KINDS: Tuple[str, ...] = ("optimize", "fluctuations", "oat", "sobol", "shape-oat", "fidelity", "slopes")


def log_axis(lo: float, hi: float, count: int) -> List[float]:
    """Log-spaced axis values, rounded to 12 significant digits for stable file names."""
    return [float(f"{v:.12g}") for v in np.logspace(math.log10(lo), math.log10(hi), count)]


DEFAULT_D_VALUES = log_axis(1.0, 100.0, 20)
DEFAULT_G_VALUES = log_axis(0.01, 3.0, 18)


class SweepConfig(BaseModel):
    """
    Everything a sweep needs to be reproduced.

    Attributes:
        kind: Analysis run at every grid point
        d_values: Optical depth axis (positive, ascending)
        g_values: tau_FWHM * gamma axis (positive, ascending)
        eps_m: Relative memory fluctuation (fluctuations, slopes)
        eps_g: Relative control drift half-width (oat, sobol, shape-oat) or
            control fluctuation (fluctuations with target control)
        samples: Monte Carlo samples per point
        seed: Master seed; per-point seeds derive from (seed, point index)
        grid_m: Nodes per axis of the Sobol' tensor grid
        oat_m: Nodes per axis of OAT scans
        fluctuation_mode: Noise model for memory fluctuations
        fluctuation_target: Fluctuate the memory point or the control field
        slope_epsilons: eps_M values for the slope fit
        shape_points: Chebyshev knots for shape optimization
        fidelity_radius: Neighborhood radius in decades
        fidelity_samples: Neighbors per point
        delay_scale_floor: Smallest reference magnitude for the delay axis
        shape_scale_floor: Smallest knot reference, as a fraction of the peak amplitude
        solver: Solver settings
        optimizer: Optimizer settings
        output_dir: Directory receiving data, manifest, cache and errors
        workers: Worker processes (1 runs in-process)
    """
    model_config = ConfigDict(frozen=True)

    kind: AnalysisKind = "optimize"
    d_values: Tuple[float, ...] = tuple(DEFAULT_D_VALUES)
    g_values: Tuple[float, ...] = tuple(DEFAULT_G_VALUES)
    eps_m: float = 0.05
    eps_g: float = 0.05
    samples: int = 1000
    seed: int = 0
    grid_m: int = 33
    oat_m: int = 21
    fluctuation_mode: FluctuationMode = "atom-number-preserving"
    fluctuation_target: Literal["memory", "control"] = "memory"
    slope_epsilons: Tuple[float, ...] = (0.01, 0.02, 0.04, 0.06, 0.08, 0.1)
    shape_points: int = 51
    fidelity_radius: float = 0.1
    fidelity_samples: int = 32
    delay_scale_floor: float = 1.0
    shape_scale_floor: float = 0.01
    solver: SolverConfig = Field(default_factory=SolverConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    output_dir: str = "./results"
    workers: int = 1

    @field_validator("d_values", "g_values")
    @classmethod
    def _axis_valid(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("grid axes must not be empty")
        if any((not math.isfinite(x)) or x <= 0 for x in v):
            raise ValueError("grid axis values must be finite and > 0")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("grid axis values must be strictly ascending")
        return v

    @field_validator("eps_m", "eps_g", "fidelity_radius", "delay_scale_floor", "shape_scale_floor")
    @classmethod
    def _non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"value must be finite and >= 0, got {v}")
        return v

    @field_validator("samples", "fidelity_samples", "workers")
    @classmethod
    def _positive_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"count must be >= 1, got {v}")
        return v

    @field_validator("grid_m", "oat_m")
    @classmethod
    def _odd_grid(cls, v: int) -> int:
        if v < 3 or v % 2 == 0:
            raise ValueError(f"grid node count must be odd and >= 3, got {v}")
        return v

    @field_validator("shape_points")
    @classmethod
    def _enough_knots(cls, v: int) -> int:
        if v < 4:
            raise ValueError(f"shape_points must be >= 4, got {v}")
        return v

    @model_validator(mode="after")
    def _kind_parameters(self) -> "SweepConfig":
        if self.kind in ("oat", "sobol", "shape-oat") and self.eps_g <= 0:
            raise ValueError(f"analysis {self.kind} needs eps_g > 0")
        if self.kind == "fluctuations" and self.fluctuation_target == "control" and self.eps_g <= 0:
            raise ValueError("control fluctuations need eps_g > 0")
        if self.kind == "slopes":
            if len(self.slope_epsilons) < 2 or len(set(self.slope_epsilons)) != len(self.slope_epsilons):
                raise ValueError("slopes need at least two distinct epsilons")
            if any(e < 0 for e in self.slope_epsilons):
                raise ValueError("slope epsilons must be >= 0")
        return self

    @property
    def points(self) -> List[Tuple[int, float, float]]:
        """(index, d, g) for every grid point, d-major."""
        grid = [(d, g) for d in self.d_values for g in self.g_values]
        return [(i, d, g) for i, (d, g) in enumerate(grid)]

    def point_seed(self, index: int) -> int:
        """Seed of one grid point, derived from the master seed and its index."""
        state = np.random.SeedSequence([self.seed, index]).generate_state(1, dtype=np.uint32)
        return int(state[0])


def load_config_document(path: Path) -> Dict[str, Any]:
    """
    Read a JSON sweep configuration.

    A manifest from a previous run is unwrapped to its "config" entry.
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        return data["config"]
    return data
