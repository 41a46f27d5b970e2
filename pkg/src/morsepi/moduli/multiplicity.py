"""Multiplicities of the index-1 points and of the base point."""

from __future__ import annotations

from dataclasses import dataclass, field

from morsepi.geometry.oracle import FREE_ABELIAN_2, FREE_CYCLIC, TRIVIAL
from morsepi.moduli.types import ModuliComponent

MINIMAL_GENERATORS = {TRIVIAL: 0, FREE_CYCLIC: 1, FREE_ABELIAN_2: 2}


def minimal_generators(kind: str | None) -> int | None:
    """Minimal generator count of a recognized oracle group, else None."""
    return MINIMAL_GENERATORS.get(kind) if kind else None


@dataclass(frozen=True)
class MultiplicityTable:
    per_point: dict[str, int] = field(default_factory=dict)
    star: int = 0
    oracle_min_generators: int | None = None

    @property
    def total(self) -> int:
        return self.star + sum(self.per_point.values())

    @property
    def holds(self) -> bool | None:
        """Whether the generator count bound holds; None when the group is unrecognized."""
        if self.oracle_min_generators is None:
            return None
        return self.total >= self.oracle_min_generators

    def lines(self) -> list[str]:
        out = [f"nu(star) = {self.star}"]
        out += [f"nu({y}) = {count}" for y, count in sorted(self.per_point.items())]
        mu = "unknown" if self.oracle_min_generators is None else str(self.oracle_min_generators)
        out.append(f"sum = {self.total}, mu = {mu}, bound holds: {self.holds}")
        return out


def multiplicities(
    point_components: dict[str, list[ModuliComponent]],
    star_components: list[ModuliComponent],
    oracle_kind: str | None = None,
) -> MultiplicityTable:
    """Boundary-bearing component counts; the distinguished star component is not counted."""
    return MultiplicityTable(
        per_point={y: sum(1 for c in comps if c.has_boundary) for y, comps in point_components.items()},
        star=sum(1 for c in star_components if c.has_boundary and not c.distinguished),
        oracle_min_generators=minimal_generators(oracle_kind),
    )
