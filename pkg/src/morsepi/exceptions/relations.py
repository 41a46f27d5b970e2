"""Relation patch and presentation exceptions."""

from morsepi.exceptions.base import MorsePiError


class RelationError(MorsePiError):
    """Base exception for relation harvesting."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message, error_code="RELATION_ERROR", details=details)


class PatchMatchingError(RelationError):
    """Raised when consecutive patches do not match along their open edges."""

    def __init__(self, message: str, patch_index: int | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "PATCH_MATCHING_ERROR"
        self.patch_index = patch_index


class PatchDiscError(RelationError):
    """Raised when a patch bottom evaluates to a nontrivial class."""

    def __init__(self, message: str, word: tuple[int, ...] | None = None, details: dict | None = None):
        super().__init__(message, details)
        self.error_code = "PATCH_DISC_ERROR"
        self.word = word
