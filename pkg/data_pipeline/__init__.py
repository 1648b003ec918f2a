"""
Sweep pipeline: per-point analyses over the (d, g) plane, heat maps and manifests.
"""

from data_pipeline.config import SweepConfig
from data_pipeline.sweep import SweepResult, run

__all__ = ["SweepConfig", "SweepResult", "run"]
