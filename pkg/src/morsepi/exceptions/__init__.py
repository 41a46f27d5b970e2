"""Exception hierarchy for morsepi."""

from morsepi.exceptions.base import MorsePiError
from morsepi.exceptions.flow import (
    DegenerateCriticalPointError,
    FlowError,
    IntegrationError,
    RegularityError,
)
from morsepi.exceptions.geometry import (
    GeometryError,
    LoopProjectionError,
    ManifoldError,
    TriangulationError,
)
from morsepi.exceptions.moduli import (
    ContinuationStallError,
    DimensionError,
    InconsistentComponentError,
    ModuliError,
)
from morsepi.exceptions.relations import PatchDiscError, PatchMatchingError, RelationError
from morsepi.exceptions.validation import ScenarioError, ValidationError
from morsepi.exceptions.walk import (
    FiberProductError,
    TransversalityError,
    WalkError,
    WalkLimitError,
)

__all__ = [
    "MorsePiError",
    "GeometryError",
    "ManifoldError",
    "TriangulationError",
    "LoopProjectionError",
    "FlowError",
    "IntegrationError",
    "DegenerateCriticalPointError",
    "RegularityError",
    "ModuliError",
    "DimensionError",
    "ContinuationStallError",
    "InconsistentComponentError",
    "WalkError",
    "TransversalityError",
    "WalkLimitError",
    "FiberProductError",
    "RelationError",
    "PatchMatchingError",
    "PatchDiscError",
    "ValidationError",
    "ScenarioError",
]
