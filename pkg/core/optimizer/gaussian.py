"""
Three-parameter Gaussian control optimization.

Nelder-Mead runs in (log theta, delay / delay range, log fwhm) so pulse area and
duration stay positive and one step tolerance is relative on every axis. Starts cover the three protocol basins: a delayed pi pulse
(absorb-then-transfer), an overlapping 2 pi pulse (Autler-Townes splitting) and a
long strong pulse (EIT), followed by random starts inside the bounds.
"""

import math
from typing import List

import numpy as np
import structlog
from scipy.optimize import minimize

from core.control.envelopes import GaussianControl, gaussian_envelope
from core.memory.dynamics import simulate_storage, storage_efficiency
from core.memory.params import MemoryParams
from core.optimizer.models import OptimizerConfig, OptimumRecord

logger = structlog.get_logger()

# (theta, delay, fwhm) heuristic starting points
HEURISTIC_STARTS = (
    (math.pi, 1.0, 0.5),          # absorb-then-transfer
    (2.0 * math.pi, 0.0, 1.0),    # Autler-Townes splitting
    (6.0 * math.pi, 0.5, 3.0),    # EIT
)


def _delay_unit(cfg: OptimizerConfig) -> float:
    return cfg.delay_bounds[1] - cfg.delay_bounds[0]


def _to_search(x: np.ndarray, cfg: OptimizerConfig) -> np.ndarray:
    return np.array([math.log(x[0]), x[1] / _delay_unit(cfg), math.log(x[2])])


def _from_search(y: np.ndarray, cfg: OptimizerConfig) -> GaussianControl:
    return GaussianControl(theta=math.exp(y[0]), delay=float(y[1]) * _delay_unit(cfg), fwhm=math.exp(y[2]))


def _search_bounds(cfg: OptimizerConfig):
    unit = _delay_unit(cfg)
    return [
        (math.log(cfg.theta_bounds[0]), math.log(cfg.theta_bounds[1])),
        (cfg.delay_bounds[0] / unit, cfg.delay_bounds[1] / unit),
        (math.log(cfg.fwhm_bounds[0]), math.log(cfg.fwhm_bounds[1])),
    ]


def starting_points(cfg: OptimizerConfig) -> List[np.ndarray]:
    """
    Starting (theta, delay, fwhm) vectors for cfg.restarts searches.

    The j-th random start depends only on the seed and j, so the first k starts
    are the same for every restart count >= k.
    """
    bounds = _search_bounds(cfg)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    starts = []
    for x in HEURISTIC_STARTS[: cfg.restarts]:
        y = np.clip(_to_search(np.array(x), cfg), lo, hi)
        starts.append(y)

    rng = np.random.Generator(np.random.MT19937(cfg.seed))
    for _ in range(cfg.restarts - len(starts)):
        starts.append(lo + (hi - lo) * rng.random(3))

    return [_from_search(y, cfg).as_vector() for y in starts]


def gaussian_efficiency(m: MemoryParams, gc: GaussianControl, cfg: OptimizerConfig) -> float:
    """Storage efficiency of a Gaussian control at m."""
    return storage_efficiency(simulate_storage(m, gaussian_envelope(gc), cfg.solver))


def optimize_gaussian(m: MemoryParams, cfg: OptimizerConfig) -> OptimumRecord:
    """
    Maximize storage efficiency over (theta, delay, fwhm).

    Args:
        m: Memory point
        cfg: Restarts, evaluation budget, bounds and solver settings

    Returns:
        Best record over all starts; `converged` is False when the best start
        ran out of evaluations before meeting the tolerance
    """
    bounds = _search_bounds(cfg)
    best_eta = -1.0
    best_y = None
    best_converged = False
    evaluations = 0

    for index, start in enumerate(starting_points(cfg)):
        y0 = _to_search(start, cfg)

        def objective(y: np.ndarray) -> float:
            return -gaussian_efficiency(m, _from_search(y, cfg), cfg)

        res = minimize(
            objective,
            y0,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "maxfev": cfg.max_evals,
                "xatol": cfg.param_tolerance,
                "fatol": 1e-8,
            },
        )
        evaluations += int(res.nfev)
        eta = -float(res.fun)
        logger.debug(
            "gaussian_start_finished",
            d=m.d,
            g=m.g,
            start=index,
            eta=eta,
            nfev=int(res.nfev),
            success=bool(res.success),
        )
        if eta > best_eta:
            best_eta, best_y, best_converged = eta, np.asarray(res.x), bool(res.success)

    best = _from_search(best_y, cfg)
    record = OptimumRecord(
        d=m.d,
        g=m.g,
        kind="gaussian",
        params=(best.theta, best.delay, best.fwhm),
        efficiency=min(max(best_eta, 0.0), 1.0),
        evaluations=evaluations,
        converged=best_converged,
    )
    logger.info(
        "gaussian_optimized",
        d=m.d,
        g=m.g,
        eta=record.efficiency,
        theta_over_pi=best.theta / math.pi,
        delay=best.delay,
        fwhm=best.fwhm,
        evaluations=evaluations,
        converged=best_converged,
    )
    return record
