"""
Structured JSON logging for majority lab.

One JSON object per line on stderr, so stdout stays free for CSV output.
"""

import json
import logging
from typing import Any

from .time import utc_now_iso_z


class StructuredLogger:
    """Custom structured logger for JSON output."""

    def __init__(self, name: str, module: str, level: str = "INFO") -> None:
        self.module = module
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper(), logging.INFO))
        self.logger.propagate = False

        # Remove existing handlers to avoid duplication
        for handler in self.logger.handlers[:]:
            self.logger.removeHandler(handler)

        handler = logging.StreamHandler()
        handler.setLevel(logging.DEBUG)
        self.logger.addHandler(handler)

    def _log(self, level: int, level_name: str, event: str, **details: Any) -> None:
        """Log structured JSON message."""
        if not self.logger.isEnabledFor(level):
            return
        log_entry = {
            "timestamp": utc_now_iso_z(),
            "level": level_name,
            "event": event,
            "module": self.module,
            **details
        }
        self.logger.log(level, json.dumps(log_entry, default=str))

    def debug(self, event: str, **details: Any) -> None:
        """Log debug level structured message."""
        self._log(logging.DEBUG, "DEBUG", event, **details)

    def info(self, event: str, **details: Any) -> None:
        """Log info level structured message."""
        self._log(logging.INFO, "INFO", event, **details)

    def warning(self, event: str, **details: Any) -> None:
        """Log warning level structured message."""
        self._log(logging.WARNING, "WARNING", event, **details)

    def error(self, event: str, exc_info: bool = False, **details: Any) -> None:
        """Log error level structured message."""
        self._log(logging.ERROR, "ERROR", event, **details)
        if exc_info:
            self.logger.error("traceback", exc_info=True)


def get_logger(module: str) -> StructuredLogger:
    """Return a structured logger for ``majority.<module>`` at the configured level."""
    from ..config import settings

    return StructuredLogger(f"majority.{module}", module, settings.log_level)
