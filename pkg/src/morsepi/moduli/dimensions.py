"""Expected dimensions of moduli spaces and their legal boundary strata."""

from __future__ import annotations

from morsepi.exceptions import DimensionError
from morsepi.moduli.types import (
    AUGMENTATION,
    COAUGMENTATION,
    CONNECTING,
    DAGGER,
    DAGGER_AUGMENTATION,
    SLICE,
    STAR,
    STAR_POINT,
    BrokenConfiguration,
    ModuliComponent,
    SpaceTag,
    ZeroLength,
)

# Boundary strata
BROKEN_AT_INDEX_0 = "broken-index-0"
ZERO_LENGTH_STRATUM = "zero-length"
ZERO_BOUNCE = "zero-bounce"


def expected_dimension(
    kind: str, n: int, source_index: int | None = None, target_index: int | None = None
) -> int:
    """Dimension of a moduli space from shifted indices.

    The shifted grading makes these agree with the unstabilized formulas.
    """
    if kind == CONNECTING:
        return source_index - target_index - 1
    if kind == AUGMENTATION:
        return source_index
    if kind == COAUGMENTATION:
        return n - target_index
    if kind == STAR_POINT:
        return -target_index
    if kind == STAR:
        return 1
    if kind == SLICE:
        return n + 1
    if kind == DAGGER:
        return source_index - target_index
    if kind == DAGGER_AUGMENTATION:
        return source_index + 1
    raise DimensionError(f"Unknown moduli space kind {kind}")


def legal_boundary(kind: str) -> frozenset[str]:
    """Strata a one-dimensional component of this kind may end on."""
    if kind == AUGMENTATION:
        return frozenset({BROKEN_AT_INDEX_0})
    if kind == STAR:
        return frozenset({BROKEN_AT_INDEX_0, ZERO_LENGTH_STRATUM})
    if kind in (DAGGER, DAGGER_AUGMENTATION):
        return frozenset({BROKEN_AT_INDEX_0, ZERO_LENGTH_STRATUM, ZERO_BOUNCE})
    raise DimensionError(f"No one-dimensional boundary table for {kind}")


def stratum(item, index_of: dict[str, int]) -> str:
    """Classify a boundary item; ``index_of`` maps critical ids to shifted indices."""
    if isinstance(item, ZeroLength):
        return ZERO_LENGTH_STRATUM
    if isinstance(item, BrokenConfiguration):
        if all(index_of.get(j) == 0 for j in item.junctions[-1:]):
            return BROKEN_AT_INDEX_0
    raise DimensionError(f"Unclassifiable boundary item {item}")


def boundary_violations(
    component: ModuliComponent, index_of: dict[str, int]
) -> list[str]:
    """Reasons a component breaks the boundary formula of its space, if any."""
    problems = []
    if len(component.boundary) not in (0, 2):
        problems.append(f"{component.id}: {len(component.boundary)} boundary items")
    allowed = legal_boundary(component.space.kind)
    for item in component.boundary:
        kind = stratum(item, index_of)
        if kind not in allowed:
            problems.append(f"{component.id}: illegal stratum {kind}")
        if isinstance(item, ZeroLength) and component.space.kind == AUGMENTATION:
            problems.append(f"{component.id}: zero length in {component.space}")
    return problems


def require_dimension(tag: SpaceTag, dimension: int, expected: int) -> None:
    if dimension != expected:
        raise DimensionError(
            f"{tag} has expected dimension {dimension}, need {expected}", expected=expected
        )
