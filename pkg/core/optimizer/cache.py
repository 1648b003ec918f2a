"""
On-disk cache of optimum records (one JSON document per line).
"""

from pathlib import Path
from typing import Dict, Iterator, Optional

import structlog

from core.memory.params import MemoryParams
from core.optimizer.models import CacheKey, ControlKind, OptimumRecord

logger = structlog.get_logger()


class OptimumCache:
    """
    Optimum records keyed by the exact (d, g, kind, N) tuple.

    `save` writes records sorted by key so the file content depends only on
    the set of records, not on insertion order.
    """

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._records: Dict[CacheKey, OptimumRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[OptimumRecord]:
        for key in sorted(self._records):
            yield self._records[key]

    def __contains__(self, key: CacheKey) -> bool:
        return key in self._records

    def load(self) -> "OptimumCache":
        """Read records from `path` if the file exists; later lines win."""
        if self.path is None or not self.path.exists():
            return self
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    self.put(OptimumRecord.from_json_line(line))
        logger.info("optimum_cache_loaded", path=str(self.path), records=len(self._records))
        return self

    def get(self, m: MemoryParams, kind: ControlKind = "gaussian", n: int = 3) -> Optional[OptimumRecord]:
        return self._records.get((float(m.d), float(m.g), kind, n))

    def put(self, record: OptimumRecord) -> None:
        self._records[record.key] = record

    def gaussian_optima(self) -> Dict:
        """Map (d, g) -> GaussianControl over all Gaussian records."""
        return {
            (rec.d, rec.g): rec.control()
            for rec in self
            if rec.kind == "gaussian"
        }

    def save(self, path: Optional[Path] = None) -> Path:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("optimum cache has no path to save to")
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            for record in self:
                f.write(record.to_json_line() + "\n")
        logger.info("optimum_cache_saved", path=str(target), records=len(self._records))
        return target
