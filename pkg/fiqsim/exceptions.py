"""
Custom Exceptions for the FIQ Simulation Toolkit
================================================

Every failure the toolkit can report has its own exception type so the CLI
can map it onto a stable exit code.
"""

from typing import Any, Dict, List, Optional


class FiqSimError(Exception):
    """Base exception for all toolkit errors"""

    def __init__(self, message: str, error_code: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for logging and reports"""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ValidationError(FiqSimError):
    """Input validation errors"""
    pass


class ConfigurationError(FiqSimError):
    """Configuration and setup errors"""
    pass


class LiteralParseError(ValidationError):
    """Malformed fiq literal"""

    def __init__(self, literal: str, column: int, message: str):
        super().__init__(f"column {column}: {message}", error_code="literal_parse")
        self.literal = literal
        self.column = column
        self.details = {"literal": literal, "column": column}


class PositionError(ValidationError):
    """Bit position is invalid, duplicated, or already determined"""

    def __init__(self, position: int, message: str):
        super().__init__(f"position {position}: {message}", error_code="position")
        self.position = position
        self.details = {"position": position}


class DomainError(ValidationError):
    """Input lies outside a map's domain"""
    pass


class StreamTooShortError(ValidationError):
    """Digit stream too short for the requested test"""

    def __init__(self, test: str, length: int, required: int):
        super().__init__(
            f"{test} needs at least {required} bits, stream has {length}",
            error_code="stream_too_short",
        )
        self.details = {"test": test, "length": length, "required": required}


class DegenerateStatisticError(FiqSimError):
    """Test statistic undefined for the given input (zero variance, one cell)"""

    def __init__(self, test: str, message: str):
        super().__init__(f"{test}: {message}", error_code="degenerate")
        self.test = test
        self.details = {"test": test}


class BudgetExhaustedError(FiqSimError):
    """Actualization budget ran out before the output digits were determined"""

    def __init__(self, budget: int, actualized: List[int], step: Optional[int] = None):
        where = f" at step {step}" if step is not None else ""
        super().__init__(
            f"Actualization budget of {budget} exhausted{where} "
            f"before the output digits were determined",
            error_code="budget_exhausted",
        )
        self.budget = budget
        self.actualized = list(actualized)
        self.step = step
        self.details = {"budget": budget, "step": step, "actualized": self.actualized}

    def at_step(self, step: int) -> "BudgetExhaustedError":
        return BudgetExhaustedError(self.budget, self.actualized, step=step)


class ComparisonUndecidedError(FiqSimError):
    """Hidden variable agrees with the probability on every bit up to the limit"""

    def __init__(self, limit: int, trial: Optional[int] = None,
                 step: Optional[int] = None):
        where = ""
        if trial is not None:
            where += f" trial {trial}"
        if step is not None:
            where += f" step {step}"
        super().__init__(
            f"Comparison r1 <= p undecided after {limit} bits{where}",
            error_code="comparison_undecided",
        )
        self.limit = limit
        self.trial = trial
        self.step = step
        self.details = {"limit": limit, "trial": trial, "step": step}

    def located(self, trial: Optional[int] = None,
                step: Optional[int] = None) -> "ComparisonUndecidedError":
        return ComparisonUndecidedError(
            self.limit,
            trial=self.trial if trial is None else trial,
            step=self.step if step is None else step,
        )


class ProcessingError(FiqSimError):
    """Experiment stage failures"""

    def __init__(self, stage: str, message: str, partial_results: Optional[Any] = None):
        super().__init__(f"Processing failed at {stage}: {message}")
        self.stage = stage
        self.partial_results = partial_results
        self.details = {"stage": stage, "has_partial_results": partial_results is not None}


class ResourceExhaustionError(FiqSimError):
    """Resource exhaustion errors"""

    def __init__(self, resource: str, message: str):
        super().__init__(f"Resource exhausted ({resource}): {message}")
        self.resource = resource
        self.details = {"resource": resource}
