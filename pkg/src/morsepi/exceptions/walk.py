"""Crocodile walk and interval fiber product exceptions."""

from morsepi.exceptions.base import MorsePiError


class WalkError(MorsePiError):
    """Base exception for crocodile walks."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, error_code="WALK_ERROR", details=details)


class TransversalityError(WalkError):
    """Raised when a loop fails the regularity margin at some loop time."""

    def __init__(self, message: str, tau: float | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "TRANSVERSALITY_ERROR"
        self.tau = tau


class WalkLimitError(WalkError):
    """Raised when a walk exceeds its corner budget."""

    def __init__(self, message: str, corners: int | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "WALK_LIMIT_EXCEEDED"
        self.corners = corners


class FiberProductError(WalkError):
    """Raised when two interval maps violate the fiber product hypotheses."""

    def __init__(self, message: str, value: object | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "FIBER_PRODUCT_ERROR"
        self.value = value
