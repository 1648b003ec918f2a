"""
Protocol labels for optimal Gaussian controls.

The labels are heuristic metadata for the heat maps; no computation depends on
them. Thresholds are written into every sweep manifest.
"""

import math
from enum import Enum

from core.exceptions import UnsupportedParameterizationError
from core.memory.params import MemoryParams
from core.optimizer.models import OptimumRecord


class ProtocolLabel(str, Enum):
    EIT = "EIT"
    ATS = "ATS"
    ATT = "ATT"
    MIXED = "mixed"


PROTOCOL_THRESHOLDS = {
    "att_theta_over_pi": (0.75, 1.25),
    "att_min_delay_over_fwhm": 0.5,
    "ats_theta_over_pi": (1.6, 2.4),
    "ats_max_abs_delay_over_fwhm": 1.0,
    "eit_min_dg": 10.0,
    "eit_min_theta_over_pi": 2.4,
}


def classify_protocol(m: MemoryParams, optimum: OptimumRecord) -> ProtocolLabel:
    """
    Label the memory protocol realized by an optimal Gaussian control.

    - ATT: theta in [0.75 pi, 1.25 pi] and delay > fwhm / 2 (control after signal)
    - ATS: theta in [1.6 pi, 2.4 pi] and |delay| <= fwhm (overlapping)
    - EIT: d g >= 10 and theta > 2.4 pi
    - mixed otherwise

    Raises:
        UnsupportedParameterizationError: For spline records
    """
    if optimum.kind != "gaussian":
        raise UnsupportedParameterizationError(
            f"protocol labels are defined for Gaussian optima, got a {optimum.kind} record"
        )
    theta, delay, fwhm = optimum.params
    area = theta / math.pi
    t = PROTOCOL_THRESHOLDS

    lo, hi = t["att_theta_over_pi"]
    if lo <= area <= hi and delay > t["att_min_delay_over_fwhm"] * fwhm:
        return ProtocolLabel.ATT
    lo, hi = t["ats_theta_over_pi"]
    if lo <= area <= hi and abs(delay) <= t["ats_max_abs_delay_over_fwhm"] * fwhm:
        return ProtocolLabel.ATS
    if m.d * m.g >= t["eit_min_dg"] and area > t["eit_min_theta_over_pi"]:
        return ProtocolLabel.EIT
    return ProtocolLabel.MIXED
