"""
Unified error handling for experiment runs.
Logs structured error context and maps exceptions onto CLI exit codes.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

import structlog

from ..exceptions import (
    ConfigurationError,
    FiqSimError,
    ValidationError,
)

logger = structlog.get_logger(__name__)

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class ErrorSeverity(Enum):
    """Error severity levels"""
    LOW = "low"            # Input rejected, nothing ran
    MEDIUM = "medium"      # Run stopped, partial results possible
    HIGH = "high"          # Run failed with an unexpected error


@dataclass
class ErrorContext:
    """Where in an experiment the error happened"""
    operation: str
    component: str
    seed: Optional[int] = None
    model: Optional[str] = None
    step: Optional[int] = None
    trial: Optional[int] = None
    additional_context: Dict[str, Any] = field(default_factory=dict)

    def as_fields(self) -> Dict[str, Any]:
        fields = {
            "operation": self.operation,
            "component": self.component,
            "seed": self.seed,
            "model": self.model,
            "step": self.step,
            "trial": self.trial,
        }
        fields.update(self.additional_context)
        return {k: v for k, v in fields.items() if v is not None}


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ValidationError, ConfigurationError)):
        return EXIT_VALIDATION
    return EXIT_RUNTIME


def severity_for(error: BaseException) -> ErrorSeverity:
    if isinstance(error, (ValidationError, ConfigurationError)):
        return ErrorSeverity.LOW
    if isinstance(error, FiqSimError):
        return ErrorSeverity.MEDIUM
    return ErrorSeverity.HIGH


class StandardErrorHandler:
    """Logs errors with context and keeps per-type counts"""

    def __init__(self) -> None:
        self.logger = structlog.get_logger("ErrorHandler")
        self.error_counts: Dict[str, int] = {}

    def handle_error(self, error: BaseException, context: ErrorContext) -> int:
        """Log the error and return the exit code it maps to"""
        error_type = type(error).__name__
        self.error_counts[error_type] = self.error_counts.get(error_type, 0) + 1
        severity = severity_for(error)

        details: Dict[str, Any] = {}
        if isinstance(error, FiqSimError):
            details = error.to_dict()["details"]

        log = self.logger.error if severity is ErrorSeverity.HIGH else self.logger.warning
        log(
            "experiment_error",
            error_type=error_type,
            error=str(error),
            severity=severity.value,
            details=details,
            **context.as_fields(),
            exc_info=severity is ErrorSeverity.HIGH,
        )
        return exit_code_for(error)

    def get_error_stats(self) -> Dict[str, Any]:
        return {
            "error_counts": dict(self.error_counts),
            "total_errors": sum(self.error_counts.values()),
        }


error_handler = StandardErrorHandler()
