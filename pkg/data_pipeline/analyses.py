"""
Per-point analyses of a sweep.

Every analysis is a pure function of the sweep configuration, the grid point
and its seed, so points can be computed in any process and any order.
Workers receive a PointTask and return a PointResult; only the collector in
the parent process touches files.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from core.control.fidelity import FidelityMapSpec, GridOptimumProvider, mean_overlap_fidelity
from core.memory.params import MemoryParams
from core.optimizer.gaussian import optimize_gaussian
from core.optimizer.models import OptimumRecord
from core.optimizer.shape import optimize_shape
from core.sensitivity.criterion import gaussian_control_criterion, memory_criterion, shape_criterion
from core.sensitivity.fluctuations import FluctuationSpec, fit_slope, fluctuation_stats
from core.sensitivity.oat import SensitivityBox, oat_profile
from core.sensitivity.sobol import sobol_decompose
from data_pipeline.config import SweepConfig
from data_pipeline.protocols import classify_protocol

logger = structlog.get_logger()

CONTROL_AXES = ("area", "delay", "duration")


@dataclass
class PointTask:
    config: SweepConfig
    index: int
    d: float
    g: float
    seed: int
    gaussian: Optional[OptimumRecord] = None
    spline: Optional[OptimumRecord] = None
    optima: Optional[Dict[Tuple[float, float], Any]] = None


@dataclass
class PointResult:
    index: int
    d: float
    g: float
    row: Optional[Dict[str, Any]] = None
    records: List[OptimumRecord] = field(default_factory=list)
    reports: Dict[str, str] = field(default_factory=dict)
    error_type: Optional[str] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class _PointContext:
    """Lazily obtained optima for one point; new optima are reported back for caching."""

    def __init__(self, task: PointTask):
        self.task = task
        self.config = task.config
        self.m = MemoryParams(d=task.d, g=task.g)
        self.new_records: List[OptimumRecord] = []
        self._gaussian = task.gaussian
        self._spline = task.spline

    @property
    def gaussian(self) -> OptimumRecord:
        if self._gaussian is None:
            self._gaussian = optimize_gaussian(self.m, self.config.optimizer)
            self.new_records.append(self._gaussian)
        return self._gaussian

    @property
    def spline(self) -> OptimumRecord:
        if self._spline is None:
            self._spline = optimize_shape(
                self.m,
                self.config.shape_points,
                self.gaussian.envelope(),
                self.config.optimizer,
            )
            self.new_records.append(self._spline)
        return self._spline

    def control_scale(self) -> Tuple[float, float, float]:
        theta, delay, fwhm = self.gaussian.params
        return (abs(theta), max(abs(delay), self.config.delay_scale_floor), abs(fwhm))

    def leading_columns(self) -> Dict[str, Any]:
        return {
            "d": self.task.d,
            "g": self.task.g,
            "protocol": classify_protocol(self.m, self.gaussian).value,
        }


# ============================================
# ANALYSES
# ============================================

def _optimize(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    rec = ctx.gaussian
    theta, delay, fwhm = rec.params
    return {
        "eta": rec.efficiency,
        "theta_over_pi": theta / math.pi,
        "delay": delay,
        "fwhm": fwhm,
        "evaluations": rec.evaluations,
        "converged": rec.converged,
    }, {}


def _fluctuations(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    cfg = ctx.config
    rec = ctx.gaussian
    if cfg.fluctuation_target == "memory":
        h = memory_criterion(rec.envelope(), cfg.solver)
        spec = FluctuationSpec(
            center=(ctx.m.d, ctx.m.g),
            epsilon=cfg.eps_m,
            n=cfg.samples,
            seed=ctx.task.seed,
            mode=cfg.fluctuation_mode,
        )
    else:
        h = gaussian_control_criterion(ctx.m, cfg.solver)
        spec = FluctuationSpec(
            center=tuple(rec.params),
            epsilon=cfg.eps_g,
            n=cfg.samples,
            seed=ctx.task.seed,
            mode="independent",
            scale=ctx.control_scale(),
        )
    report = fluctuation_stats(h, spec)
    return {"eta_opt": rec.efficiency, "eta_mean": report.mean, "sigma_eta": report.std}, {}


def _control_box(ctx: _PointContext, m: int) -> SensitivityBox:
    return SensitivityBox(
        center=tuple(ctx.gaussian.params),
        epsilon=ctx.config.eps_g,
        m=m,
        scale=ctx.control_scale(),
    )


def _oat(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    h = gaussian_control_criterion(ctx.m, ctx.config.solver)
    profile = oat_profile(h, _control_box(ctx, ctx.config.oat_m))
    row: Dict[str, Any] = {"eta_opt": ctx.gaussian.efficiency}
    for name, (_, sigma) in zip(CONTROL_AXES, profile):
        row[f"sigma_{name}"] = sigma
    return row, {}


def _sobol(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    h = gaussian_control_criterion(ctx.m, ctx.config.solver)
    report = sobol_decompose(h, _control_box(ctx, ctx.config.grid_m), seed=ctx.task.seed)
    row: Dict[str, Any] = {"eta_opt": ctx.gaussian.efficiency}
    for i, name in enumerate(CONTROL_AXES):
        row[f"s_{name}"] = report.s_first[i]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        row[f"s_{CONTROL_AXES[i]}_{CONTROL_AXES[j]}"] = report.s_second[i][j]
    row["s_area_delay_duration"] = report.s_highest
    row["closure_residual"] = report.closure_residual
    return row, {f"sobol_{ctx.task.index:04d}.json": report.to_json() + "\n"}


def _shape_oat(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    cfg = ctx.config
    rec = ctx.spline
    values = np.asarray(rec.params, dtype=float)
    floor = cfg.shape_scale_floor * max(float(values.max()), 1e-12)
    box = SensitivityBox(
        center=tuple(values.tolist()),
        epsilon=cfg.eps_g,
        m=cfg.oat_m,
        scale=tuple(np.maximum(np.abs(values), floor).tolist()),
    )
    h = shape_criterion(ctx.m, knots=rec.knots, cfg=cfg.solver)
    sigmas = np.array([s for _, s in oat_profile(h, box)])

    lines = ["knot,value,sigma_oat"]
    for knot, value, sigma in zip(rec.knots, values, sigmas):
        lines.append(f"{float(knot)!r},{float(value)!r},{float(sigma)!r}")
    report = "\n".join(lines) + "\n"

    row = {
        "eta_gaussian": ctx.gaussian.efficiency,
        "eta_shape": rec.efficiency,
        "n_points": len(values),
        "sigma_max": float(sigmas.max()),
        "sigma_mean": float(sigmas.mean()),
        "knot_of_sigma_max": float(rec.knots[int(np.argmax(sigmas))]),
    }
    return row, {f"shape_oat_{ctx.task.index:04d}.csv": report}


def _fidelity(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    cfg = ctx.config
    provider = GridOptimumProvider(ctx.task.optima or {}, clamp=True)
    spec = FidelityMapSpec(radius=cfg.fidelity_radius, sample_count=cfg.fidelity_samples, seed=ctx.task.seed)
    value = mean_overlap_fidelity(ctx.m, spec, provider)
    return {"eta_opt": ctx.gaussian.efficiency, "fidelity_mean": value}, {}


def _slopes(ctx: _PointContext) -> Tuple[Dict[str, Any], Dict[str, str]]:
    cfg = ctx.config
    h = memory_criterion(ctx.gaussian.envelope(), cfg.solver)
    sigmas = []
    row: Dict[str, Any] = {"eta_opt": ctx.gaussian.efficiency}
    for eps in cfg.slope_epsilons:
        spec = FluctuationSpec(
            center=(ctx.m.d, ctx.m.g),
            epsilon=eps,
            n=cfg.samples,
            seed=ctx.task.seed,
            mode=cfg.fluctuation_mode,
        )
        sigma = fluctuation_stats(h, spec).std
        sigmas.append(sigma)
        row[f"sigma_eps_{eps:g}"] = sigma
    row["slope"] = fit_slope(cfg.slope_epsilons, sigmas)
    return row, {}


ANALYSES: Dict[str, Callable[[_PointContext], Tuple[Dict[str, Any], Dict[str, str]]]] = {
    "optimize": _optimize,
    "fluctuations": _fluctuations,
    "oat": _oat,
    "sobol": _sobol,
    "shape-oat": _shape_oat,
    "fidelity": _fidelity,
    "slopes": _slopes,
}


def analyze_point(task: PointTask) -> PointResult:
    """
    Run the configured analysis at one grid point.

    Failures are captured in the result instead of raised so one bad point
    never aborts a sweep.
    """
    ctx = _PointContext(task)
    kind = task.config.kind
    try:
        metrics, reports = ANALYSES[kind](ctx)
        row = ctx.leading_columns()
        row.update(metrics)
    except Exception as e:
        logger.error("sweep_point_failed", index=task.index, d=task.d, g=task.g, kind=kind, error=str(e))
        return PointResult(
            index=task.index,
            d=task.d,
            g=task.g,
            records=ctx.new_records,
            error_type=type(e).__name__,
            error=str(e),
        )

    logger.info("sweep_point_done", index=task.index, d=task.d, g=task.g, kind=kind)
    return PointResult(
        index=task.index,
        d=task.d,
        g=task.g,
        row=row,
        records=ctx.new_records,
        reports=reports,
    )


def optimize_point(task: PointTask) -> PointResult:
    """Make sure a Gaussian optimum exists for the point (first phase of fidelity sweeps)."""
    ctx = _PointContext(task)
    try:
        _ = ctx.gaussian
    except Exception as e:
        logger.error("sweep_point_failed", index=task.index, d=task.d, g=task.g, kind="optimize", error=str(e))
        return PointResult(index=task.index, d=task.d, g=task.g, error_type=type(e).__name__, error=str(e))
    return PointResult(index=task.index, d=task.d, g=task.g, records=ctx.new_records)
