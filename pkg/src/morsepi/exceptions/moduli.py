"""Moduli space exceptions."""

from morsepi.exceptions.base import MorsePiError


class ModuliError(MorsePiError):
    """Base exception for moduli space enumeration."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, error_code="MODULI_ERROR", details=details)


class DimensionError(ModuliError):
    """Raised when a space is requested at a dimension the enumerator does not handle."""

    def __init__(self, message: str, expected: int | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "DIMENSION_ERROR"
        self.expected = expected


class ContinuationStallError(ModuliError):
    """Raised when pseudo-arclength continuation underflows its step size."""

    def __init__(self, message: str, component_id: str | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "CONTINUATION_STALL"
        self.component_id = component_id


class InconsistentComponentError(ModuliError):
    """Raised when a traced component has an unclassifiable or illegal boundary."""

    def __init__(self, message: str, component_id: str | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "INCONSISTENT_COMPONENT"
        self.component_id = component_id
