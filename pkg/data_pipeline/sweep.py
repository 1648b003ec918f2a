"""
Parameter-plane sweep job.

Visits every (d, g) grid point, takes the optimal control from the cache (or
optimizes it), runs the configured analysis and writes:

    <out>/<kind>.csv      heat-map rows sorted by (d, g)
    <out>/manifest.json   config echo, seed, versions, classifier thresholds
    <out>/optima.jsonl    optimum cache (reused by later runs)
    <out>/errors.csv      per-point failures (header always present)
    <out>/reports/        per-point extras (Sobol' JSON, shape OAT profiles)
"""

import csv
import json
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Dict, Iterable, List

import structlog

from core.optimizer.cache import OptimumCache
from core.memory.params import MemoryParams
from data_pipeline.analyses import PointResult, PointTask, analyze_point, optimize_point
from data_pipeline.config import SweepConfig
from data_pipeline.heatmap import emit_heatmap
from data_pipeline.protocols import PROTOCOL_THRESHOLDS

logger = structlog.get_logger()

PACKAGE_VERSION = "0.1.0"

ERRORS_HEADER = ["index", "d", "g", "error_type", "message"]

RECORDED_PACKAGES = ("numpy", "scipy", "pandas", "pydantic", "structlog")


@dataclass
class SweepResult:
    """Outcome of a sweep run."""
    config: SweepConfig
    data_path: Path
    manifest_path: Path
    errors_path: Path
    cache_path: Path
    rows: List[Dict] = field(default_factory=list)
    errors: List[PointResult] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.errors)


def _package_versions() -> Dict[str, str]:
    versions = {"python": platform.python_version(), "memory-sensitivity": PACKAGE_VERSION}
    for name in RECORDED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def _prepare_output(out: Path) -> Path:
    """Create the output tree and the errors file; fails before any computation."""
    out.mkdir(parents=True, exist_ok=True)
    errors_path = out / "errors.csv"
    with open(errors_path, "w", encoding="utf-8", newline="") as f:
        csv.writer(f, lineterminator="\n").writerow(ERRORS_HEADER)
    return errors_path


def _execute(func, tasks: List[PointTask], workers: int) -> List[PointResult]:
    """Run tasks in-process or on a process pool; results come back in task order."""
    if not tasks:
        return []
    if workers == 1 or len(tasks) == 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(func, tasks, chunksize=1))


def _make_tasks(config: SweepConfig, cache: OptimumCache, optima=None) -> List[PointTask]:
    tasks = []
    for index, d, g in config.points:
        m = MemoryParams(d=d, g=g)
        tasks.append(
            PointTask(
                config=config,
                index=index,
                d=d,
                g=g,
                seed=config.point_seed(index),
                gaussian=cache.get(m, "gaussian", 3),
                spline=cache.get(m, "spline", config.shape_points),
                optima=optima,
            )
        )
    return tasks


def _absorb(cache: OptimumCache, results: Iterable[PointResult]) -> None:
    for result in results:
        for record in result.records:
            cache.put(record)


def _write_errors(path: Path, errors: List[PointResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ERRORS_HEADER)
        for res in sorted(errors, key=lambda r: r.index):
            writer.writerow([res.index, repr(float(res.d)), repr(float(res.g)), res.error_type, res.error])


def _write_reports(out: Path, results: Iterable[PointResult]) -> None:
    reports_dir = out / "reports"
    for result in results:
        for name, text in sorted(result.reports.items()):
            reports_dir.mkdir(parents=True, exist_ok=True)
            with open(reports_dir / name, "w", encoding="utf-8", newline="") as f:
                f.write(text)


def write_manifest(config: SweepConfig, path: Path, summary: Dict) -> Path:
    manifest = {
        "config": config.model_dump(mode="json"),
        "seed": config.seed,
        "versions": _package_versions(),
        "protocol_thresholds": PROTOCOL_THRESHOLDS,
        "summary": summary,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return path


def run(config: SweepConfig) -> SweepResult:
    """
    Execute a sweep and write its files.

    Args:
        config: Sweep configuration

    Returns:
        SweepResult with the rows, the failed points and the file paths

    Raises:
        OSError: If the output directory cannot be written
    """
    out = Path(config.output_dir)
    errors_path = _prepare_output(out)
    cache_path = out / "optima.jsonl"
    cache = OptimumCache(cache_path).load()

    logger.info(
        "sweep_started",
        kind=config.kind,
        points=len(config.points),
        workers=config.workers,
        cached_optima=len(cache),
        output_dir=str(out),
    )

    optima = None
    failed: List[PointResult] = []
    if config.kind == "fidelity":
        # the neighbor average needs optima across the whole grid first
        first = _execute(optimize_point, _make_tasks(config, cache), config.workers)
        _absorb(cache, first)
        failed.extend(r for r in first if not r.ok)
        optima = cache.gaussian_optima()

    results = _execute(analyze_point, _make_tasks(config, cache, optima), config.workers)
    _absorb(cache, results)

    failed_indices = {r.index for r in failed}
    failed.extend(r for r in results if not r.ok and r.index not in failed_indices)
    rows = [r.row for r in results if r.ok]

    data_path = out / f"{config.kind}.csv"
    if rows:
        emit_heatmap(rows, data_path)
    else:
        logger.warning("sweep_produced_no_rows", kind=config.kind)
    _write_reports(out, (r for r in results if r.ok))
    _write_errors(errors_path, failed)
    if len(cache):
        cache.save()

    summary = {"points": len(config.points), "rows": len(rows), "errors": len(failed)}
    manifest_path = write_manifest(config, out / "manifest.json", summary)

    logger.info("sweep_completed", kind=config.kind, **summary)
    return SweepResult(
        config=config,
        data_path=data_path,
        manifest_path=manifest_path,
        errors_path=errors_path,
        cache_path=cache_path,
        rows=rows,
        errors=failed,
    )
