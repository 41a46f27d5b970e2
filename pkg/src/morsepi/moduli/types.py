"""Moduli space elements: rigid arcs, broken configurations, components."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import FlowArc

# Space kinds
CONNECTING = "connecting"  # M(x-, x+)
AUGMENTATION = "augmentation"  # M(x-, M)
COAUGMENTATION = "coaugmentation"  # M(M, x+)
STAR_POINT = "star-point"  # M(*, x+)
STAR = "star"  # M(*, M)
SLICE = "slice"  # M(M, M)
DAGGER = "dagger"  # M†(x-, x+)
DAGGER_AUGMENTATION = "dagger-augmentation"  # M†(x-, M)

ZERO_LENGTH = "zero-length"


@dataclass(frozen=True)
class SpaceTag:
    """Which moduli space a component or arc belongs to."""

    kind: str
    source: str | None = None
    target: str | None = None

    @property
    def label(self) -> str:
        source = self.source or "M"
        target = self.target or "M"
        prefix = "M†" if self.kind in (DAGGER, DAGGER_AUGMENTATION) else "M"
        return f"{prefix}({source},{target})"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class RigidArc:
    """An isolated trajectory: a connecting arc, an augmentation or a star arc.

    ``parameter`` locates it in its shooting family (unstable angle, line
    coordinate, or 0 for constant ones); ``slope`` is the transversality
    margin of the sign change that produced it.
    """

    id: str
    kind: str
    source: str
    target: str
    arc: FlowArc
    parameter: float = 0.0
    slope: float = 1.0
    sign: int = 0
    crossing: int = 0

    @property
    def root(self) -> str:
        return self.source

    def ev_plus(self, data: StableMorseData) -> np.ndarray:
        return data.model.normalize(data.point(self.arc.end_point))

    def ev_minus(self, data: StableMorseData) -> np.ndarray:
        return data.model.normalize(data.point(self.arc.start_point))


@dataclass(frozen=True)
class BrokenConfiguration:
    """A broken limit (beta, alpha): an upper arc into an index-0 point, then alpha.

    ``legs`` are the flow arcs, each ending where the next starts;
    ``junctions`` the critical points between them.
    """

    beta: str
    alpha: str
    legs: tuple[FlowArc, ...]
    junctions: tuple[str, ...]
    terminal: str
    ev: np.ndarray
    slope: float = 1.0
    parameter: float = 0.0

    @property
    def key(self) -> tuple[str, str]:
        return (self.beta, self.alpha)

    @property
    def is_zero_length(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"({self.beta}, {self.alpha})"


@dataclass(frozen=True)
class ZeroLength:
    """The zero-length trajectory at a base point."""

    base: str
    ev: np.ndarray

    @property
    def key(self) -> tuple[str, str]:
        return (ZERO_LENGTH, self.base)

    @property
    def is_zero_length(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"{ZERO_LENGTH}({self.base})"


Boundary = BrokenConfiguration | ZeroLength


@dataclass(frozen=True)
class ComponentSample:
    """One point of a traced component: its parameters and the slice endpoint."""

    parameter: np.ndarray
    end: np.ndarray


@dataclass(frozen=True)
class ModuliComponent:
    """A connected component of a one-dimensional moduli space.

    Samples run from ``boundary[0]`` to ``boundary[1]``; ``orientation``
    records whether that order was reversed from the traced one.
    """

    id: str
    space: SpaceTag
    samples: tuple[ComponentSample, ...]
    boundary: tuple[Boundary, ...] = field(default_factory=tuple)
    orientation: int = 1
    distinguished: bool = False
    complete: bool = True

    @property
    def has_boundary(self) -> bool:
        return len(self.boundary) == 2

    @property
    def is_closed(self) -> bool:
        return not self.boundary

    def reversed(self) -> "ModuliComponent":
        return replace(
            self,
            samples=self.samples[::-1],
            boundary=self.boundary[::-1],
            orientation=-self.orientation,
        )

    def parameters(self) -> np.ndarray:
        return np.array([s.parameter for s in self.samples])

    def ev_path(self, data: StableMorseData) -> np.ndarray:
        """ev+ along the component, closed off by the boundary evaluations."""
        model = data.model
        inner = [model.normalize(data.point(s.end)) for s in self.samples]
        if self.has_boundary:
            inner = [self.boundary[0].ev, *inner, self.boundary[1].ev]
        return np.array(inner)

    def endpoint_cloud(self, data: StableMorseData) -> np.ndarray:
        return np.array([data.embed_state(s.end) for s in self.samples])
