"""
Drift box around a setpoint and one-at-a-time (OAT) variances.

Axis i spans [c_i - w_i, c_i + w_i] with w_i = epsilon_i * scale_i. The box is
represented by the m midpoints of m equal cells per axis, each carrying weight
1/m, so grid averages are midpoint-rule integrals against the uniform law.
"""

import math
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, model_validator

from core.exceptions import InvalidArgumentError, PoisonedSampleError
from core.sensitivity.criterion import CriterionFunction

logger = structlog.get_logger()


class SensitivityBox(BaseModel):
    """
    Uniform drift box.

    Attributes:
        center: Setpoint vector
        epsilon: Relative half-width per axis (a single value applies to all)
        m: Nodes per axis (odd, >= 3, so the center is a node)
        scale: Per-axis reference magnitude (defaults to |center|)
    """
    model_config = ConfigDict(frozen=True)

    center: Tuple[float, ...]
    epsilon: Tuple[float, ...]
    m: int = 21
    scale: Optional[Tuple[float, ...]] = None

    @model_validator(mode="before")
    @classmethod
    def _broadcast_epsilon(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("epsilon"), (int, float)):
            data = dict(data)
            data["epsilon"] = tuple([float(data["epsilon"])] * len(data.get("center", ())))
        return data

    @model_validator(mode="after")
    def _check_box(self) -> "SensitivityBox":
        n = len(self.center)
        if n == 0:
            raise ValueError("box needs at least one axis")
        if len(self.epsilon) != n:
            raise ValueError(f"epsilon needs {n} entries, got {len(self.epsilon)}")
        if any((not math.isfinite(e)) or e <= 0 for e in self.epsilon):
            raise ValueError("epsilon must be finite and > 0 on every axis")
        if self.m < 3 or self.m % 2 == 0:
            raise ValueError(f"m must be odd and >= 3, got {self.m}")
        if self.scale is not None and len(self.scale) != n:
            raise ValueError(f"scale needs {n} entries, got {len(self.scale)}")
        widths = self.half_widths
        if np.any(widths <= 0) or not np.all(np.isfinite(widths)):
            raise ValueError(f"every axis needs a positive finite half-width, got {widths.tolist()}")
        return self

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float], m: int) -> "SensitivityBox":
        """Box spanning [lo_i, hi_i] on each axis."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return cls(
            center=tuple(((lo + hi) / 2.0).tolist()),
            epsilon=tuple([1.0] * len(lo)),
            m=m,
            scale=tuple(((hi - lo) / 2.0).tolist()),
        )

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def half_widths(self) -> np.ndarray:
        if self.scale is not None:
            ref = np.asarray(self.scale, dtype=float)
        else:
            ref = np.abs(np.asarray(self.center, dtype=float))
        return np.asarray(self.epsilon, dtype=float) * ref

    def nodes(self, axis: int) -> np.ndarray:
        """
        Cell midpoints along one axis, ascending; the middle node is the center.

        The outermost nodes sit half a cell inside the box edges, at
        c +- w (m - 1) / m, so the nodes never reach c +- w. Their variance is
        w^2 (m^2 - 1) / (3 m^2) against w^2 (m + 1) / (3 (m - 1)) for m points
        that include both edges (about 9% lower in variance, 5% in sigma, at m = 21).
        """
        k = np.arange(self.m)
        offsets = (2 * k + 1 - self.m) / self.m
        return self.center[axis] + self.half_widths[axis] * offsets


def _check_finite(values: np.ndarray) -> None:
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise PoisonedSampleError(int(bad[0]), float(values[bad[0]]))


def _axis_points(box: SensitivityBox, axis: int) -> np.ndarray:
    points = np.tile(np.asarray(box.center, dtype=float), (box.m, 1))
    points[:, axis] = box.nodes(axis)
    return points


def oat_variance(h: CriterionFunction, box: SensitivityBox, axis: int) -> Tuple[float, float]:
    """
    Variance of h along one axis with the others held at the center.

    Returns:
        (V_OAT, sigma_OAT) as population variance and its square root
    """
    if h.dimension != box.dimension:
        raise InvalidArgumentError(f"criterion dimension {h.dimension} != box dimension {box.dimension}")
    if not 0 <= axis < box.dimension:
        raise InvalidArgumentError(f"axis {axis} out of range for dimension {box.dimension}")
    values = h.evaluate_many(_axis_points(box, axis))
    _check_finite(values)
    variance = float(np.var(values))
    return variance, math.sqrt(variance)


def oat_profile(h: CriterionFunction, box: SensitivityBox) -> List[Tuple[float, float]]:
    """OAT (variance, sigma) for every axis from one batched evaluation."""
    if h.dimension != box.dimension:
        raise InvalidArgumentError(f"criterion dimension {h.dimension} != box dimension {box.dimension}")
    points = np.vstack([_axis_points(box, i) for i in range(box.dimension)])
    values = h.evaluate_many(points)
    _check_finite(values)

    profile = []
    for i in range(box.dimension):
        variance = float(np.var(values[i * box.m : (i + 1) * box.m]))
        profile.append((variance, math.sqrt(variance)))
    logger.info("oat_profile_computed", criterion=h.name, axes=box.dimension, m=box.m)
    return profile
