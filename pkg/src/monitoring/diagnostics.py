"""
Diagnostics

Recoverable findings (ignored elements, dropped links, aborted actions) are
collected as ``Diagnostic`` records next to the result they belong to and
mirrored to the module logger.
"""

import logging
from typing import Iterable, List, Optional

from pydantic import BaseModel, ConfigDict

from src.errors import ConversionError

LEVELS = ("info", "warning", "error")


class Diagnostic(BaseModel):
    """One recorded finding."""
    model_config = ConfigDict(frozen=True)

    message: str
    level: str = "warning"  # info, warning, error
    code: str = ""
    source: Optional[str] = None
    line: Optional[int] = None

    def render(self) -> str:
        where = ""
        if self.source:
            where = f"{self.source}:" + (f"{self.line}:" if self.line is not None else "") + " "
        elif self.line is not None:
            where = f"line {self.line}: "
        return f"[{self.level}] {where}{self.message}"


class DiagnosticLog:
    """Append-only diagnostic collector bound to a logger."""

    def __init__(self, logger: logging.Logger, source: Optional[str] = None):
        self.logger = logger
        self.source = source
        self.entries: List[Diagnostic] = []

    def record(self, message: str, level: str = "warning", code: str = "",
               line: Optional[int] = None) -> Diagnostic:
        if level not in LEVELS:
            raise ValueError(f"unknown diagnostic level '{level}'")
        entry = Diagnostic(message=message, level=level, code=code, source=self.source, line=line)
        self.entries.append(entry)
        self.logger.log(logging.getLevelName(level.upper()), entry.render())
        return entry

    def info(self, message: str, code: str = "", line: Optional[int] = None) -> Diagnostic:
        return self.record(message, "info", code, line)

    def warning(self, message: str, code: str = "", line: Optional[int] = None) -> Diagnostic:
        return self.record(message, "warning", code, line)

    def error(self, message: str, code: str = "", line: Optional[int] = None) -> Diagnostic:
        return self.record(message, "error", code, line)

    def downgrade(self, error: ConversionError, level: str = "warning") -> Diagnostic:
        """Record an error that the caller chose not to raise."""
        return self.record(error.message, level, error.code, error.line)

    def extend(self, entries: Iterable[Diagnostic]) -> None:
        self.entries.extend(entries)

    def count(self, level: str) -> int:
        return sum(1 for e in self.entries if e.level == level)
