"""Flow field, integration and regularity exceptions."""

from morsepi.exceptions.base import MorsePiError


class FlowError(MorsePiError):
    """Base exception for stable Morse data and its flow."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, error_code="FLOW_ERROR", details=details)


class IntegrationError(FlowError):
    """Raised when the integrator underflows or a trajectory escapes without an event."""

    def __init__(self, message: str, reason: str | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "INTEGRATION_ERROR"
        self.reason = reason


class DegenerateCriticalPointError(FlowError):
    """Raised when a critical point has a degenerate Hessian."""

    def __init__(self, message: str, location: list[float] | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "DEGENERATE_CRITICAL_POINT"
        self.location = location


class RegularityError(FlowError):
    """Raised when a transversality margin falls below the configured threshold."""

    def __init__(
        self,
        message: str,
        pair: str | None = None,
        margin: float | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, details)
        self.error_code = "REGULARITY_ERROR"
        self.pair = pair
        self.margin = margin
