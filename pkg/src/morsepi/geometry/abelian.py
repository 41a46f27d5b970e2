"""Abelianization of finitely presented groups via Smith normal form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from morsepi.geometry.words import exponent_vector


@dataclass(frozen=True)
class AbelianInvariants:
    """Free rank and torsion coefficients of an abelian group."""

    rank: int
    torsion: tuple[int, ...] = field(default_factory=tuple)

    def __str__(self) -> str:
        parts = ["Z"] * self.rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def abelianize(generator_count: int, relators: Sequence[Sequence[int]]) -> AbelianInvariants:
    """Invariants of Z^n modulo the exponent vectors of the relators."""
    if generator_count == 0:
        return AbelianInvariants(rank=0)
    rows = [exponent_vector(r, generator_count) for r in relators]
    rows = [row for row in rows if any(row)]
    if not rows:
        return AbelianInvariants(rank=generator_count)

    factors = [abs(int(d)) for d in invariant_factors(Matrix(rows), domain=ZZ)]
    nonzero = [d for d in factors if d != 0]
    return AbelianInvariants(
        rank=generator_count - len(nonzero),
        torsion=tuple(sorted(d for d in nonzero if d > 1)),
    )
