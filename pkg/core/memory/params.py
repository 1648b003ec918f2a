"""
Memory point, input signal and solver settings.

Times are measured in units of the signal intensity FWHM, positions in units of
the medium length. The memory enters the dimensionless model only through the
optical depth d and the product g = tau_FWHM * gamma.
"""

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator
from scipy.special import ndtr

SIGNAL_EXPONENT = 2.0 * math.log(2.0)

# Standard deviation of the signal intensity profile |A_in|^2
SIGNAL_INTENSITY_STD = 1.0 / math.sqrt(8.0 * math.log(2.0))

MIN_SIGNAL_ENERGY_FRACTION = 0.999


class MemoryParams(BaseModel):
    """
    Intrinsic memory point M = (d, g).

    Attributes:
        d: Resonant optical depth (resonant cw intensity transmission is exp(-2d))
        g: Signal duration times intermediate-state coherence decay rate
    """
    model_config = ConfigDict(frozen=True)

    d: float
    g: float

    @field_validator("d", "g")
    @classmethod
    def _finite_non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"memory parameters must be finite and >= 0, got {v}")
        return v

    @property
    def adiabaticity(self) -> float:
        """d * tau_FWHM * gamma; >> 1 adiabatic, <~ 1 non-adiabatic."""
        return self.d * self.g

    def key(self) -> Tuple[float, float]:
        return (float(self.d), float(self.g))


class SignalPulse(BaseModel):
    """
    Gaussian input signal.

    The standard signal (center 0, intensity FWHM 1, energy 1) fixes the units;
    other centers are used to check time covariance.
    """
    model_config = ConfigDict(frozen=True)

    center: float = 0.0
    fwhm: float = 1.0
    energy: float = 1.0

    @field_validator("center")
    @classmethod
    def _center_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"signal center must be finite, got {v}")
        return v

    @field_validator("fwhm", "energy")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"signal fwhm and energy must be finite and > 0, got {v}")
        return v


STANDARD_SIGNAL = SignalPulse()


def signal_envelope(tau, pulse: SignalPulse = STANDARD_SIGNAL) -> np.ndarray:
    """
    Input signal amplitude A_in(tau).

    For the standard signal, A_in(tau) = (4 ln2 / pi)^(1/4) * exp(-2 ln2 tau^2):
    real, positive, unit energy, intensity FWHM 1.
    """
    tau = np.asarray(tau, dtype=float)
    peak = math.sqrt(pulse.energy) * (4.0 * math.log(2.0) / (math.pi * pulse.fwhm ** 2)) ** 0.25
    return peak * np.exp(-SIGNAL_EXPONENT * ((tau - pulse.center) / pulse.fwhm) ** 2)


def signal_energy_fraction(window: Tuple[float, float], pulse: SignalPulse = STANDARD_SIGNAL) -> float:
    """Fraction of the signal energy that falls inside a time window."""
    std = pulse.fwhm * SIGNAL_INTENSITY_STD
    lo = (window[0] - pulse.center) / std
    hi = (window[1] - pulse.center) / std
    return float(ndtr(hi) - ndtr(lo))


class SolverConfig(BaseModel):
    """
    Discretization of the (z, tau) domain.

    Attributes:
        n_z: Number of z grid points on [0, 1]
        dt: Time step; None picks min(dt_max, feature_width / 50) per run
        dt_max: Upper bound for the automatic time step
        window: (tau_start, tau_end) integration window
        snapshot_stride: Record fields every this many steps (0 disables)
    """
    model_config = ConfigDict(frozen=True)

    n_z: int = 200
    dt: Optional[float] = None
    dt_max: float = 1e-3
    window: Tuple[float, float] = (-3.0, 6.0)
    snapshot_stride: int = 0

    @field_validator("n_z")
    @classmethod
    def _enough_z_points(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"n_z must be >= 2, got {v}")
        return v

    @field_validator("dt")
    @classmethod
    def _dt_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and (not math.isfinite(v) or v <= 0):
            raise ValueError(f"dt must be finite and > 0, got {v}")
        return v

    @field_validator("dt_max")
    @classmethod
    def _dt_max_positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"dt_max must be finite and > 0, got {v}")
        return v

    @field_validator("snapshot_stride")
    @classmethod
    def _stride_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"snapshot_stride must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def _window_ordered(self) -> "SolverConfig":
        start, end = self.window
        if not (math.isfinite(start) and math.isfinite(end)) or not start < end:
            raise ValueError(f"window must satisfy tau_start < tau_end, got {self.window}")
        return self

    @property
    def span(self) -> float:
        return self.window[1] - self.window[0]

    def shifted(self, delta: float) -> "SolverConfig":
        """Same discretization over a window moved by delta."""
        return self.model_copy(update={"window": (self.window[0] + delta, self.window[1] + delta)})

    def refined(self, dt: float) -> "SolverConfig":
        """Doubled z resolution with half the given time step."""
        return self.model_copy(update={"n_z": 2 * self.n_z, "dt": dt / 2.0})
