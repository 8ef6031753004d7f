"""
Custom exceptions and error handlers for majority lab.

Library code raises the exceptions below; the CLI turns them into a JSON
error document on stderr and a process exit code through the handlers.
"""

import json
import sys
from typing import Any, Dict, Optional, TextIO

from pydantic import ValidationError

from .utils.log import get_logger

logger = get_logger("exceptions")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class MajorityLabError(Exception):
    """Base exception for majority lab errors."""
    def __init__(self, message: str, exit_code: int = EXIT_FAILURE, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class InvalidParameterError(MajorityLabError):
    """Exception raised when a parameter violates an operation's domain."""
    def __init__(self, message: str, field: Optional[str] = None):
        details = {"field": field} if field else {}
        self.field = field
        super().__init__(
            message=message,
            exit_code=EXIT_USAGE,
            details=details
        )


class UnknownSuiteError(InvalidParameterError):
    """Exception raised when a verification suite name is not registered."""
    def __init__(self, suite: str, known: Optional[list] = None):
        super().__init__(f"Unknown verification suite: {suite}", field="suite")
        self.details["known_suites"] = sorted(known or [])


class OutputError(MajorityLabError):
    """Exception raised when an output file cannot be written."""
    def __init__(self, original_error: OSError):
        super().__init__(
            message="Writing output failed",
            exit_code=EXIT_FAILURE,
            details={
                "os_error_type": type(original_error).__name__,
                "os_error_message": str(original_error)
            }
        )


def _emit(payload: Dict[str, Any], stream: Optional[TextIO]) -> None:
    stream = stream or sys.stderr
    stream.write(json.dumps(payload, default=str) + "\n")


def handle_lab_error(exc: MajorityLabError, command: str, stream: Optional[TextIO] = None) -> int:
    """Handle majority lab exceptions; return the process exit code."""
    logger.error(
        "majority_lab_error",
        command=command,
        message=exc.message,
        exit_code=exc.exit_code,
        details=exc.details
    )
    _emit({
        "error": type(exc).__name__,
        "message": exc.message,
        "details": exc.details,
        "exit_code": exc.exit_code
    }, stream)
    return exc.exit_code


def handle_validation_error(
    exc: ValidationError,
    command: str,
    flag_names: Optional[Dict[str, str]] = None,
    stream: Optional[TextIO] = None,
) -> int:
    """Handle pydantic validation errors, naming the offending flag(s)."""
    flag_names = flag_names or {}
    errors = []
    for error in exc.errors():
        location = [str(part) for part in error.get("loc", ())]
        field = location[0] if location else None
        errors.append({
            "flag": flag_names.get(field, f"--{field}") if field else None,
            "message": error.get("msg", "")
        })
    logger.warning("validation_error", command=command, errors=errors)
    flags = ", ".join(e["flag"] for e in errors if e["flag"]) or "configuration"
    _emit({
        "error": "ValidationError",
        "message": f"Invalid value for {flags}",
        "details": {"validation_errors": errors},
        "exit_code": EXIT_USAGE
    }, stream)
    return EXIT_USAGE


def handle_unexpected_error(exc: Exception, command: str, stream: Optional[TextIO] = None) -> int:
    """Handle unexpected exceptions."""
    logger.error(
        "unexpected_error",
        exc_info=True,
        command=command,
        exception_type=type(exc).__name__,
        message=str(exc)
    )
    _emit({
        "error": "InternalError",
        "message": "An unexpected error occurred",
        "details": {
            "exception_type": type(exc).__name__,
            "support_contact": "Check stderr logs for details"
        },
        "exit_code": EXIT_FAILURE
    }, stream)
    return EXIT_FAILURE
