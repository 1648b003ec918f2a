"""
Control-field envelopes: Gaussian and Chebyshev-spline shapes, pulse area, overlap fidelity.
"""

from core.control.envelopes import (
    ControlEnvelope,
    GaussianControl,
    GaussianEnvelope,
    SplineControl,
    SplineEnvelope,
    ZeroEnvelope,
    chebyshev_knots,
    export_envelope_csv,
    gaussian_envelope,
    pulse_area,
    spline_envelope,
)
from core.control.fidelity import (
    FidelityMapSpec,
    GridOptimumProvider,
    mean_overlap_fidelity,
    overlap_fidelity,
)

__all__ = [
    "ControlEnvelope",
    "GaussianControl",
    "GaussianEnvelope",
    "SplineControl",
    "SplineEnvelope",
    "ZeroEnvelope",
    "chebyshev_knots",
    "export_envelope_csv",
    "gaussian_envelope",
    "pulse_area",
    "spline_envelope",
    "FidelityMapSpec",
    "GridOptimumProvider",
    "mean_overlap_fidelity",
    "overlap_fidelity",
]
