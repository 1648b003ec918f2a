"""Variance-based sensitivity analysis of scalar performance criteria."""

from core.sensitivity.criterion import (
    CriterionFunction,
    gaussian_control_criterion,
    memory_criterion,
    shape_criterion,
)
from core.sensitivity.fluctuations import (
    FluctuationReport,
    FluctuationSpec,
    fit_slope,
    fluctuation_stats,
    sample_fluctuations,
)
from core.sensitivity.oat import SensitivityBox, oat_profile, oat_variance
from core.sensitivity.sobol import SobolReport, anova_variances, sobol_decompose

__all__ = [
    "CriterionFunction",
    "FluctuationReport",
    "FluctuationSpec",
    "SensitivityBox",
    "SobolReport",
    "anova_variances",
    "fit_slope",
    "fluctuation_stats",
    "gaussian_control_criterion",
    "memory_criterion",
    "oat_profile",
    "oat_variance",
    "sample_fluctuations",
    "shape_criterion",
    "sobol_decompose",
]
