"""
Monitoring Package

Provides conversion observability:
- Diagnostics collected per document, road map and simulation run
- Batch run statistics and the JSON run report (``src.monitoring.run_report``)

Usage:
    import logging

    from src.monitoring import DiagnosticLog

    log = DiagnosticLog(logging.getLogger("osc2cr.openscenario"), source="scenario.xosc")
    log.warning("ignored unsupported action", "unsupported_action")
"""

from .diagnostics import Diagnostic, DiagnosticLog

__all__ = [
    "Diagnostic",
    "DiagnosticLog",
]
