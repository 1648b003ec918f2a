"""
Command-line front end for parameter-plane sweeps.

Usage:
    python -m app.cli fluctuations --out results/fluct --samples 1000
    python -m app.cli sobol --config results/sobol/manifest.json --workers 8
    python -m app.cli sweep --kind oat --d 10 30 --g 0.01 0.15

Exit codes: 0 success, 1 configuration or I/O error, 2 partial failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog
from colorama import Fore, Style, init
from pydantic import ValidationError

from app.config import Settings, settings
from core.exceptions import ConfigurationError
from data_pipeline.config import ANALYSIS_KINDS, SweepConfig, load_config_document
from data_pipeline.sweep import SweepResult, run

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2


def configure_logging(level: str = "INFO", fmt: str = "json") -> None:
    """
    Configure structlog for CLI runs.

    Logs go to stderr so data written to files and the summary on stdout stay clean.
    """
    renderer = structlog.dev.ConsoleRenderer() if fmt == "console" else structlog.processors.JSONRenderer()
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),  # ISO formatında zaman damgası
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(getattr(logging, level.upper(), logging.INFO)),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


# ============================================
# CONFIGURATION LAYERS
# ============================================

def settings_document(s: Settings) -> Dict[str, Any]:
    """Sweep configuration implied by the application settings."""
    d_values, g_values = s.sweep_axes()
    return {
        "d_values": list(d_values),
        "g_values": list(g_values),
        "eps_m": s.eps_m,
        "eps_g": s.eps_g,
        "samples": s.fluctuation_samples,
        "seed": s.seed,
        "grid_m": s.sobol_grid_m,
        "oat_m": s.oat_grid_m,
        "solver": s.solver_config().model_dump(mode="json"),
        "optimizer": s.optimizer_config().model_dump(mode="json"),
        "output_dir": s.output_dir,
        "workers": s.workers,
    }


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def flag_document(args: argparse.Namespace) -> Dict[str, Any]:
    """Configuration keys set explicitly on the command line."""
    mapping = {
        "kind": args.kind,
        "output_dir": args.out,
        "seed": args.seed,
        "workers": args.workers,
        "eps_m": args.eps_m,
        "eps_g": args.eps_g,
        "samples": args.samples,
        "grid_m": args.grid_m,
        "d_values": args.d,
        "g_values": args.g,
        "fluctuation_target": args.target,
        "fluctuation_mode": args.mode,
        "shape_points": args.shape_points,
    }
    return {k: v for k, v in mapping.items() if v is not None}


def build_config(args: argparse.Namespace, s: Settings = settings) -> SweepConfig:
    """Settings < JSON config file < command-line flags."""
    document = settings_document(s)
    if args.config:
        document = _merge(document, load_config_document(Path(args.config)))
    document = _merge(document, flag_document(args))
    # the seed flag also drives the optimizer's random starts
    if args.seed is not None:
        document["optimizer"] = _merge(document.get("optimizer", {}), {"seed": args.seed})
    return SweepConfig.model_validate(document)


# ============================================
# ARGUMENTS
# ============================================

def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON config file (a previous manifest works too)")
    common.add_argument("--out", type=str, help="Output directory")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--workers", type=int, help="Worker processes")
    common.add_argument("--eps-m", dest="eps_m", type=float, help="Relative memory fluctuation")
    common.add_argument("--eps-g", dest="eps_g", type=float, help="Relative control drift")
    common.add_argument("--samples", type=int, help="Monte Carlo samples per point")
    common.add_argument("--grid-m", dest="grid_m", type=int, help="Sobol' grid nodes per axis")
    common.add_argument("--d", type=float, nargs="+", help="Optical depth values (overrides the axis)")
    common.add_argument("--g", type=float, nargs="+", help="tau_FWHM * gamma values (overrides the axis)")
    common.add_argument("--target", choices=["memory", "control"], help="Fluctuation target")
    common.add_argument("--mode", choices=["independent", "atom-number-preserving"], help="Memory noise model")
    common.add_argument("--shape-points", dest="shape_points", type=int, help="Chebyshev knots for shape-oat")
    common.add_argument("--log-level", dest="log_level", type=str, help="Log level (default from settings)")
    common.add_argument("--log-format", dest="log_format", choices=["json", "console"], help="Log renderer")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memsense",
        description="Storage-efficiency sweeps and sensitivity maps for Lambda-type quantum memories",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()

    for kind in ANALYSIS_KINDS:
        p = sub.add_parser(kind, parents=[common], help=f"Run the {kind} analysis over the grid")
        p.set_defaults(kind=kind)

    p = sub.add_parser("sweep", parents=[common], help="Run the analysis named by --kind or the config")
    p.add_argument("--kind", choices=list(ANALYSIS_KINDS), default=None, help="Analysis kind")
    return parser


# ============================================
# SUMMARY
# ============================================

def print_summary(result: SweepResult) -> None:
    init()
    cfg = result.config
    print(f"\n{Fore.CYAN}SWEEP SUMMARY{Style.RESET_ALL} ({cfg.kind})")
    print(f"   Points:   {len(cfg.points)}")
    print(f"   {Fore.GREEN}Rows:     {len(result.rows)}{Style.RESET_ALL}")
    color = Fore.RED if result.errors else Fore.GREEN
    print(f"   {color}Errors:   {len(result.errors)}{Style.RESET_ALL}")
    if result.rows:
        print(f"   Data:     {result.data_path}")
    print(f"   Manifest: {result.manifest_path}")
    for failure in result.errors[:5]:
        print(f"   {Fore.RED}✗ d={failure.d:g} g={failure.g:g}: {failure.error_type}: {failure.error}{Style.RESET_ALL}")
    if result.errors:
        print(f"\n{Fore.YELLOW}⚠ Partial failure, see {result.errors_path}{Style.RESET_ALL}")
    else:
        print(f"\n{Fore.GREEN}✓ Sweep completed successfully{Style.RESET_ALL}")


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level, args.log_format or settings.log_format)

    try:
        config = build_config(args)
    except (ValidationError, ConfigurationError, ValueError, OSError, json.JSONDecodeError) as e:
        logger.error("sweep_config_invalid", error=str(e))
        print(f"\n✗ Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        result = run(config)
    except (ConfigurationError, OSError) as e:
        logger.error("sweep_failed", error=str(e))
        print(f"\n✗ Error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    print_summary(result)
    return EXIT_PARTIAL_FAILURE if result.partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
