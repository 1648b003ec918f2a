"""
Overlap fidelity between control envelopes and its neighborhood average.

The neighborhood average measures how quickly the optimal Gaussian control
changes as the memory point moves: points m' are drawn uniformly from a disk
of radius R around m in (log10 d, log10 g) coordinates.
"""

import math
from typing import TYPE_CHECKING, Dict, Mapping, Protocol, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.interpolate import RegularGridInterpolator

from core.control.envelopes import (
    ControlEnvelope,
    GaussianControl,
    integrate_interval,
    envelope_energy,
    gaussian_envelope,
)
from core.exceptions import InvalidArgumentError, MissingOptimumError, UndefinedFidelityError

if TYPE_CHECKING:
    from core.memory.params import MemoryParams

logger = structlog.get_logger()


# ============================================
# PAIRWISE FIDELITY
# ============================================

def overlap_fidelity(c1: ControlEnvelope, c2: ControlEnvelope) -> float:
    """
    Normalized squared overlap of two envelopes.

    F = |int Omega1* Omega2|^2 / (int |Omega1|^2 * int |Omega2|^2)

    Raises:
        UndefinedFidelityError: If either envelope has zero energy
    """
    e11 = envelope_energy(c1)
    e22 = envelope_energy(c2)
    if e11 <= 0.0 or e22 <= 0.0:
        raise UndefinedFidelityError(
            f"overlap fidelity undefined for zero-energy envelope (energies {e11:.3g}, {e22:.3g})"
        )

    lo = max(c1.support[0], c2.support[0])
    hi = min(c1.support[1], c2.support[1])
    cross = integrate_interval(
        lambda t: float(np.conj(c1(t)) * c2(t)),
        lo,
        hi,
        tuple(c1.breakpoints) + tuple(c2.breakpoints),
        epsrel=1e-11,
    )

    fidelity = abs(cross) ** 2 / (e11 * e22)
    return float(min(max(fidelity, 0.0), 1.0))


# ============================================
# OPTIMUM PROVIDERS
# ============================================

PointKey = Tuple[float, float]


class OptimumProvider(Protocol):
    """Anything that can hand out the optimal Gaussian control at a memory point."""

    def optimum_for(self, m: "MemoryParams") -> GaussianControl:
        ...


class ExactOptimumProvider:
    """Looks optima up by exact (d, g) key."""

    def __init__(self, optima: Mapping[PointKey, GaussianControl]):
        self.optima = dict(optima)

    def optimum_for(self, m: "MemoryParams") -> GaussianControl:
        key = (float(m.d), float(m.g))
        if key not in self.optima:
            raise MissingOptimumError(key)
        return self.optima[key]


class GridOptimumProvider:
    """
    Bilinear interpolation of optimal Gaussian parameters over a (d, g) grid.

    Interpolation runs in (log10 d, log10 g) on (theta, delay, log fwhm), so the
    interpolated FWHM stays positive. Grid points themselves are returned exactly.
    Cells touching a grid point without an optimum interpolate to NaN and are
    reported as missing.

    Args:
        optima: Optimal controls keyed by (d, g)
        clamp: Hold values constant beyond the grid edges instead of raising
    """

    def __init__(self, optima: Mapping[PointKey, GaussianControl], clamp: bool = False):
        self.optima: Dict[PointKey, GaussianControl] = dict(optima)
        self.clamp = clamp
        if not self.optima:
            raise InvalidArgumentError("grid optimum provider needs at least one optimum")
        self.d_axis = sorted({k[0] for k in self.optima})
        self.g_axis = sorted({k[1] for k in self.optima})
        if self.d_axis[0] <= 0 or self.g_axis[0] <= 0:
            raise InvalidArgumentError("grid interpolation needs d > 0 and g > 0")
        self._axes = (np.log10(self.d_axis), np.log10(self.g_axis))

        table = np.full((len(self.d_axis), len(self.g_axis), 3), np.nan)
        for (d, g), gc in self.optima.items():
            table[self.d_axis.index(d), self.g_axis.index(g)] = (gc.theta, gc.delay, math.log(gc.fwhm))

        # RegularGridInterpolator needs two points per axis; single-point axes are held fixed
        self._active = [i for i, axis in enumerate(self._axes) if len(axis) > 1]
        if self._active:
            self._interpolator = RegularGridInterpolator(
                [self._axes[i] for i in self._active],
                table.reshape([len(self._axes[i]) for i in self._active] + [3]),
                method="linear",
                bounds_error=False,
                fill_value=np.nan,
            )
        else:
            self._interpolator = None
            self._single = table[0, 0]

    def optimum_for(self, m: "MemoryParams") -> GaussianControl:
        point = (float(m.d), float(m.g))
        if point in self.optima:
            return self.optima[point]
        if m.d <= 0 or m.g <= 0:
            raise MissingOptimumError(point, "grid interpolation needs d > 0 and g > 0")

        query = np.array([math.log10(m.d), math.log10(m.g)])
        lo = np.array([axis[0] for axis in self._axes])
        hi = np.array([axis[-1] for axis in self._axes])
        if np.any(query < lo - 1e-12) or np.any(query > hi + 1e-12):
            if not self.clamp:
                raise MissingOptimumError(point, "outside the cached grid")
        query = np.clip(query, lo, hi)

        if self._interpolator is None:
            v = self._single
        else:
            v = self._interpolator(query[self._active][None, :])[0]
        if not np.all(np.isfinite(v)):
            raise MissingOptimumError(point, "a surrounding grid point has no optimum")
        return GaussianControl(theta=max(float(v[0]), 0.0), delay=float(v[1]), fwhm=math.exp(v[2]))


# ============================================
# NEIGHBORHOOD AVERAGE
# ============================================

class FidelityMapSpec(BaseModel):
    """
    Neighborhood used for the average overlap fidelity.

    Attributes:
        radius: Disk radius in decades of (log10 d, log10 g)
        sample_count: Number of neighbors drawn per point
        seed: Mersenne Twister seed for neighbor placement
    """
    model_config = ConfigDict(frozen=True)

    radius: float = 0.1
    sample_count: int = 32
    seed: int = 0

    @field_validator("radius")
    @classmethod
    def _radius_non_negative(cls, v: float) -> float:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"radius must be finite and >= 0, got {v}")
        return v

    @field_validator("sample_count")
    @classmethod
    def _count_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"sample_count must be >= 1, got {v}")
        return v


def sample_disk_neighbors(m: "MemoryParams", spec: FidelityMapSpec) -> np.ndarray:
    """
    Draw neighbor points uniformly from the log-coordinate disk around m.

    Returns:
        Array of shape (sample_count, 2) with (d', g') rows
    """
    if m.d <= 0 or m.g <= 0:
        raise InvalidArgumentError(f"log-coordinate neighborhood needs d > 0 and g > 0, got {m}")
    rng = np.random.Generator(np.random.MT19937(spec.seed))
    u = rng.random(spec.sample_count)
    phi = 2.0 * np.pi * rng.random(spec.sample_count)
    r = spec.radius * np.sqrt(u)
    log_d = math.log10(m.d) + r * np.cos(phi)
    log_g = math.log10(m.g) + r * np.sin(phi)
    return np.column_stack([10.0 ** log_d, 10.0 ** log_g])


def mean_overlap_fidelity(
    m: "MemoryParams",
    spec: FidelityMapSpec,
    optima: Union[OptimumProvider, Mapping[PointKey, GaussianControl]],
) -> float:
    """
    Average overlap fidelity of the optimal control at m with its neighbors.

    Args:
        m: Memory point
        spec: Neighborhood radius, sample count and seed
        optima: Provider (or exact mapping) of optimal Gaussian controls

    Returns:
        Mean of overlap_fidelity(G(m), G(m')) over the sampled neighbors

    Raises:
        MissingOptimumError: If the provider cannot supply an optimum
    """
    from core.memory.params import MemoryParams

    provider = optima if hasattr(optima, "optimum_for") else ExactOptimumProvider(optima)

    reference = gaussian_envelope(provider.optimum_for(m))
    if spec.radius == 0.0:
        neighbors = np.tile([m.d, m.g], (spec.sample_count, 1))
    else:
        neighbors = sample_disk_neighbors(m, spec)

    fidelities = []
    for d_n, g_n in neighbors:
        if spec.radius == 0.0:
            neighbor = m
        else:
            neighbor = MemoryParams(d=float(d_n), g=float(g_n))
        other = gaussian_envelope(provider.optimum_for(neighbor))
        fidelities.append(overlap_fidelity(reference, other))

    value = float(np.mean(fidelities))
    logger.debug("mean_overlap_fidelity_computed", d=m.d, g=m.g, radius=spec.radius, value=value)
    return value
