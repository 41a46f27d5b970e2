"""Input validation exceptions."""

from morsepi.exceptions.base import MorsePiError


class ValidationError(MorsePiError):
    """Raised when input validation fails."""

    def __init__(self, message: str, field: str | None = None, details: dict | None = None):
        super().__init__(message, error_code="VALIDATION_ERROR", details=details)
        self.field = field


class ScenarioError(ValidationError):
    """Raised when a scenario file cannot be read or parsed."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
        line: int | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, field, details)
        self.error_code = "SCENARIO_ERROR"
        self.line = line
