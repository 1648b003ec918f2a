"""
Heat-map CSV files: one row per (d, g) point.
"""

import csv
from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd
import structlog

from core.exceptions import SchemaError

logger = structlog.get_logger()

LEADING_COLUMNS = ("d", "g", "protocol")


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        # shortest round-trip decimal
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _schema(rows: Sequence[Dict[str, Any]]) -> List[str]:
    columns = list(rows[0].keys())
    if tuple(columns[:3]) != LEADING_COLUMNS:
        raise SchemaError(f"rows must start with columns {LEADING_COLUMNS}, got {columns[:3]}")
    for i, row in enumerate(rows):
        if list(row.keys()) != columns:
            raise SchemaError(f"row {i} has columns {list(row.keys())}, expected {columns}")
    return columns


def emit_heatmap(rows: Sequence[Dict[str, Any]], path: Path) -> Path:
    """
    Write rows as `d,g,protocol,<metrics>` CSV sorted by (d, g).

    Args:
        rows: Dicts sharing one key order, starting with d, g, protocol
        path: Output file (UTF-8, LF line endings)

    Raises:
        SchemaError: If rows are empty or do not share one schema
    """
    if not rows:
        raise SchemaError("cannot emit a heat map without rows")
    columns = _schema(rows)
    ordered = sorted(rows, key=lambda r: (float(r["d"]), float(r["g"])))

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in ordered:
            writer.writerow([_format_value(row[c]) for c in columns])

    logger.info("heatmap_written", path=str(path), rows=len(ordered), columns=len(columns))
    return path


def read_heatmap(path: Path) -> pd.DataFrame:
    """Parse an emitted heat map; floats come back bit-identical."""
    return pd.read_csv(path, float_precision="round_trip", keep_default_na=False, na_values=[""])
