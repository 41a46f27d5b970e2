"""Manifold, triangulation and oracle exceptions."""

from morsepi.exceptions.base import MorsePiError


class GeometryError(MorsePiError):
    """Base exception for manifold models and the simplicial oracle."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, error_code="GEOMETRY_ERROR", details=details)


class ManifoldError(GeometryError):
    """Raised when a builtin model is unknown or its atlas is inconsistent."""

    def __init__(self, message: str, name: str | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "MANIFOLD_ERROR"
        self.name = name


class TriangulationError(GeometryError):
    """Raised when a triangulation cannot be built or is not a valid complex."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "TRIANGULATION_ERROR"


class LoopProjectionError(GeometryError):
    """Raised when a loop cannot be snapped to an edge path."""

    def __init__(self, message: str, index: int | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "LOOP_PROJECTION_ERROR"
        self.index = index
