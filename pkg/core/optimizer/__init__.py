"""Control-field optimization for maximal storage efficiency."""

from core.optimizer.cache import OptimumCache
from core.optimizer.gaussian import gaussian_efficiency, optimize_gaussian, starting_points
from core.optimizer.models import OptimizerConfig, OptimumRecord
from core.optimizer.shape import optimize_shape

__all__ = [
    "OptimizerConfig",
    "OptimumCache",
    "OptimumRecord",
    "gaussian_efficiency",
    "optimize_gaussian",
    "optimize_shape",
    "starting_points",
]
