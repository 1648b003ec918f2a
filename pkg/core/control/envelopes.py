"""
Control-field envelopes.

Two parameterizations are supported:
- Gaussian: pulse area, delay relative to the signal center, amplitude FWHM
- Spline: non-negative Rabi amplitudes on a Chebyshev grid, natural cubic spline

All envelopes are real, non-negative, immutable and picklable so they can be
shipped to worker processes. Pulse area follows theta = 2 * integral(Omega).
"""

import csv
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from core.exceptions import InvalidArgumentError

logger = structlog.get_logger()

# Gaussian envelopes are treated as zero beyond this many widths from the center
GAUSSIAN_SUPPORT_WIDTHS = 10.0

DEFAULT_SPLINE_WINDOW: Tuple[float, float] = (-2.0, 6.0)


# ============================================
# ENVELOPE VALUES
# ============================================

class ControlEnvelope(ABC):
    """
    Control Rabi envelope Omega(tau) in units of the inverse signal duration.

    Subclasses evaluate vectorized over numpy arrays and are zero outside
    `support`.
    """

    @abstractmethod
    def __call__(self, tau) -> np.ndarray:
        """Evaluate the envelope at dimensionless time(s) tau."""

    @property
    @abstractmethod
    def support(self) -> Tuple[float, float]:
        """Interval outside which the envelope vanishes."""

    @property
    def feature_width(self) -> Optional[float]:
        """Smallest time scale of the envelope, if it has one."""
        return None

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        """Points worth telling an adaptive quadrature about."""
        return ()

    @abstractmethod
    def shifted(self, delta: float) -> "ControlEnvelope":
        """Return the same envelope moved later in time by `delta`."""

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class ZeroEnvelope(ControlEnvelope):
    """Omega identically zero."""

    def __call__(self, tau) -> np.ndarray:
        return np.zeros_like(np.asarray(tau, dtype=float))

    @property
    def support(self) -> Tuple[float, float]:
        return (0.0, 0.0)

    def shifted(self, delta: float) -> "ZeroEnvelope":
        return self

    def is_zero(self) -> bool:
        return True


@dataclass(frozen=True)
class GaussianEnvelope(ControlEnvelope):
    """Omega(tau) = peak * exp(-(tau - center)^2 / sigma^2)."""

    peak: float
    center: float
    sigma: float

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return self.peak * np.exp(-((tau - self.center) / self.sigma) ** 2)

    @property
    def support(self) -> Tuple[float, float]:
        half = GAUSSIAN_SUPPORT_WIDTHS * self.sigma
        return (self.center - half, self.center + half)

    @property
    def fwhm(self) -> float:
        return 2.0 * math.sqrt(math.log(2.0)) * self.sigma

    @property
    def feature_width(self) -> Optional[float]:
        return self.fwhm

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return (self.center,)

    def shifted(self, delta: float) -> "GaussianEnvelope":
        return GaussianEnvelope(peak=self.peak, center=self.center + delta, sigma=self.sigma)

    def is_zero(self) -> bool:
        return self.peak == 0.0


@dataclass(frozen=True)
class SplineEnvelope(ControlEnvelope):
    """Natural cubic spline through (knot, value) pairs, clipped at zero."""

    knots: Tuple[float, ...]
    values: Tuple[float, ...]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        spline = CubicSpline(
            np.asarray(self.knots, dtype=float),
            np.asarray(self.values, dtype=float),
            bc_type="natural",
        )
        object.__setattr__(self, "_spline", spline)

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        inside = (tau >= self.knots[0]) & (tau <= self.knots[-1])
        out = np.where(inside, self._spline(np.clip(tau, self.knots[0], self.knots[-1])), 0.0)
        return np.maximum(out, 0.0)

    @property
    def support(self) -> Tuple[float, float]:
        return (self.knots[0], self.knots[-1])

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self.knots

    def shifted(self, delta: float) -> "SplineEnvelope":
        return SplineEnvelope(
            knots=tuple(k + delta for k in self.knots),
            values=self.values,
        )

    def is_zero(self) -> bool:
        return not any(self.values)


# ============================================
# PARAMETERIZATIONS
# ============================================

class GaussianControl(BaseModel):
    """
    Gaussian control field G_G = (theta, delay, fwhm).

    Attributes:
        theta: Pulse area in radians (2 * integral of Omega)
        delay: Control center relative to the signal center
        fwhm: Amplitude FWHM of the control envelope
    """
    model_config = ConfigDict(frozen=True)

    theta: float
    delay: float = 0.0
    fwhm: float

    @field_validator("theta")
    @classmethod
    def _theta_non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"pulse area must be finite and >= 0, got {v}")
        return v

    @field_validator("fwhm")
    @classmethod
    def _fwhm_positive(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"control FWHM must be finite and > 0, got {v}")
        return v

    @field_validator("delay")
    @classmethod
    def _delay_finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"control delay must be finite, got {v}")
        return v

    @property
    def sigma(self) -> float:
        return self.fwhm / (2.0 * math.sqrt(math.log(2.0)))

    @property
    def peak(self) -> float:
        return self.theta / (2.0 * math.sqrt(math.pi) * self.sigma)

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta, self.delay, self.fwhm], dtype=float)

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "GaussianControl":
        return cls(theta=float(x[0]), delay=float(x[1]), fwhm=float(x[2]))


class SplineControl(BaseModel):
    """
    Arbitrarily shaped control field G_s = (xi_1, ..., xi_N) on fixed knots.
    """
    model_config = ConfigDict(frozen=True)

    knots: Tuple[float, ...]
    values: Tuple[float, ...]

    @field_validator("knots")
    @classmethod
    def _knots_increasing(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) < 4:
            raise ValueError(f"spline needs at least 4 knots, got {len(v)}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("spline knots must be strictly increasing")
        return v

    @field_validator("values")
    @classmethod
    def _values_non_negative(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any((not math.isfinite(x)) or x < 0 for x in v):
            raise ValueError("spline values must be finite and >= 0")
        return v

    @property
    def n_points(self) -> int:
        return len(self.knots)

    @property
    def window(self) -> Tuple[float, float]:
        return (self.knots[0], self.knots[-1])


# ============================================
# CONSTRUCTION
# ============================================

def gaussian_envelope(gc: GaussianControl) -> GaussianEnvelope:
    """
    Build the Gaussian envelope for a control parameterization.

    Omega(tau) = Omega_0 * exp(-(tau - delay)^2 / sigma^2) with
    sigma = fwhm / (2 sqrt(ln 2)) and Omega_0 = theta / (2 sqrt(pi) sigma),
    so that 2 * integral(Omega) = theta.
    """
    return GaussianEnvelope(peak=gc.peak, center=gc.delay, sigma=gc.sigma)


def chebyshev_knots(n: int, window: Tuple[float, float] = DEFAULT_SPLINE_WINDOW) -> np.ndarray:
    """
    Chebyshev-Lobatto points over a window, ascending, endpoints included.

    Args:
        n: Number of points (>= 2)
        window: (tau_a, tau_b) with tau_a < tau_b

    Returns:
        Array of n knot times, symmetric about the window midpoint
    """
    if n < 2:
        raise InvalidArgumentError(f"need at least 2 Chebyshev points, got {n}")
    tau_a, tau_b = float(window[0]), float(window[1])
    if not tau_a < tau_b:
        raise InvalidArgumentError(f"window must satisfy tau_a < tau_b, got {window}")

    # sin form of -cos(k pi / (n-1)); odd symmetry keeps the grid exactly mirrored
    k = np.arange(n)
    x = np.sin(np.pi * (2 * k - (n - 1)) / (2 * (n - 1)))
    mid = 0.5 * (tau_a + tau_b)
    half = 0.5 * (tau_b - tau_a)
    knots = mid + half * x
    knots[0], knots[-1] = tau_a, tau_b
    return knots


def spline_envelope(sc: SplineControl) -> SplineEnvelope:
    """Interpolate the spline control through its knots."""
    if len(sc.knots) != len(sc.values):
        raise InvalidArgumentError(
            f"knots/values length mismatch: {len(sc.knots)} != {len(sc.values)}"
        )
    return SplineEnvelope(knots=tuple(sc.knots), values=tuple(sc.values))


def spline_from_envelope(
    ctrl: ControlEnvelope,
    n: int,
    window: Tuple[float, float] = DEFAULT_SPLINE_WINDOW,
) -> SplineControl:
    """Sample an envelope at Chebyshev knots (negative samples clipped to 0)."""
    knots = chebyshev_knots(n, window)
    values = np.maximum(np.asarray(ctrl(knots), dtype=float), 0.0)
    return SplineControl(knots=tuple(knots.tolist()), values=tuple(values.tolist()))


# ============================================
# MEASUREMENTS
# ============================================

def integrate_interval(func, a: float, b: float, breakpoints: Sequence[float], epsrel: float) -> float:
    if b <= a:
        return 0.0
    inner = sorted({p for p in breakpoints if a < p < b})
    value, _ = quad(
        func,
        a,
        b,
        points=inner or None,
        epsrel=epsrel,
        epsabs=1e-14,
        limit=max(200, 4 * len(inner) + 50),
    )
    return float(value)


def pulse_area(ctrl: ControlEnvelope, window: Optional[Tuple[float, float]] = None) -> float:
    """
    Pulse area theta = 2 * integral of Omega over the window.

    Args:
        ctrl: Control envelope
        window: Integration interval (default: the envelope support)

    Returns:
        Pulse area in radians
    """
    if ctrl.is_zero():
        return 0.0
    a, b = window if window is not None else ctrl.support
    lo, hi = max(a, ctrl.support[0]), min(b, ctrl.support[1])
    area = integrate_interval(lambda t: float(ctrl(t)), lo, hi, ctrl.breakpoints, epsrel=1e-10)
    return 2.0 * area


def envelope_energy(ctrl: ControlEnvelope) -> float:
    """Integral of |Omega|^2 over the envelope support."""
    if ctrl.is_zero():
        return 0.0
    a, b = ctrl.support
    return integrate_interval(lambda t: float(ctrl(t)) ** 2, a, b, ctrl.breakpoints, epsrel=1e-11)


def export_envelope_csv(
    ctrl: ControlEnvelope,
    path: Path,
    resolution: int = 2001,
    window: Optional[Tuple[float, float]] = None,
) -> Path:
    """
    Write the envelope as a two-column `tau,omega` CSV for plotting.

    Args:
        ctrl: Envelope to sample
        path: Output file
        resolution: Number of equally spaced samples
        window: Sampling interval (default: the envelope support)
    """
    if resolution < 2:
        raise InvalidArgumentError(f"resolution must be >= 2, got {resolution}")
    a, b = window if window is not None else ctrl.support
    if not a < b:
        raise InvalidArgumentError(f"cannot sample an empty window {(a, b)}")
    taus = np.linspace(a, b, resolution)
    omegas = ctrl(taus)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["tau", "omega"])
        for t, w in zip(taus, omegas):
            writer.writerow([repr(float(t)), repr(float(w))])

    logger.debug("envelope_exported", path=str(path), samples=resolution)
    return path
