"""
Run Report

Batch statistics and the JSON report written by ``main.py batch``:
- one entry per input file, sorted by input path
- success rate over all files
- average conversion time and scenario duration over successful files
- SHA-256 digest of the whole file list for quick comparison of runs
"""

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.errors import ConversionIOError
from src.pipeline.converter import ConversionResult

logger = logging.getLogger("osc2cr.report")

REPORT_VERSION = "1.0.0"


@dataclass
class RunStats:
    """Aggregate statistics over a batch of conversions"""
    files: List[ConversionResult] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, result: ConversionResult) -> None:
        with self._lock:
            self.files.append(result)

    @property
    def total(self) -> int:
        return len(self.files)

    @property
    def successes(self) -> List[ConversionResult]:
        return [r for r in self.files if r.success]

    @property
    def success_rate(self) -> float:
        return len(self.successes) / self.total if self.files else 0.0

    @property
    def avg_conversion_time(self) -> Optional[float]:
        ok = self.successes
        return sum(r.conversion_time for r in ok) / len(ok) if ok else None

    @property
    def avg_scenario_duration(self) -> Optional[float]:
        ok = self.successes
        return sum(r.scenario_duration for r in ok) / len(ok) if ok else None

    @property
    def exit_code(self) -> int:
        """0 when every file converted, otherwise the worst per-file code."""
        return max((r.exit_code for r in self.files), default=0)

    def sorted_files(self) -> List[ConversionResult]:
        return sorted(self.files, key=lambda r: r.input_path)

    def outputs_digest(self) -> str:
        """Hash over every written output's digest, independent of timing."""
        h = hashlib.sha256()
        for result in self.sorted_files():
            for kind, digest in sorted(result.output_sha256.items()):
                h.update(f"{result.input_path}|{kind}|{digest}\n".encode())
        return h.hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": REPORT_VERSION,
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "summary": {
                "total": self.total,
                "succeeded": len(self.successes),
                "failed": self.total - len(self.successes),
                "success_rate": self.success_rate,
                "avg_conversion_time": self.avg_conversion_time,
                "avg_scenario_duration": self.avg_scenario_duration,
                "outputs_sha256": self.outputs_digest(),
            },
            "files": [r.to_dict() for r in self.sorted_files()],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)


def write_report(stats: RunStats, path: Path) -> None:
    """Write the JSON report, creating parent directories."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(stats.to_json() + "\n", encoding="utf-8")
    except OSError as e:
        raise ConversionIOError(f"cannot write report: {e.strerror or e}", source=str(path)) from e
    logger.info(f"Wrote report for {stats.total} file(s) to {path}")


def summary_lines(stats: RunStats) -> List[str]:
    """Human-readable summary for the console."""
    lines = [
        f"Files:            {stats.total}",
        f"Success rate:     {stats.success_rate:.1%} ({len(stats.successes)}/{stats.total})",
    ]
    if stats.avg_conversion_time is not None:
        lines.append(f"Avg. conversion:  {stats.avg_conversion_time:.2f} s")
        lines.append(f"Avg. duration:    {stats.avg_scenario_duration:.2f} s")
    for result in stats.sorted_files():
        if not result.success:
            lines.append(f"FAILED {result.input_path}: {result.error}")
    return lines
