"""Shared fixtures: scenarios on disk, a recording event bus and synthetic moduli components."""

from pathlib import Path

import numpy as np
import pytest

from morsepi.config import Settings
from morsepi.events.base import Event, EventBus
from morsepi.moduli.types import (
    AUGMENTATION,
    STAR,
    BrokenConfiguration,
    ModuliComponent,
    SpaceTag,
    ZeroLength,
)
from morsepi.observability.metrics import MetricsCollector

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

CIRCLE_TEXT = """\
# stabilized circle
manifold = circle
support_radius = 3.0
base_point = 1.2
f_terms = cos(theta)
seed = 7
"""


class MockEventBus(EventBus):
    """Event bus that keeps every published event."""

    def __init__(self):
        self.events: list[Event] = []

    def subscribe(self, event_type: str, handler) -> None:
        pass

    def publish(self, event: Event) -> None:
        self.events.append(event)

    def unsubscribe(self, event_type: str, handler) -> None:
        pass

    def of_type(self, event_type: str) -> list[Event]:
        return [e for e in self.events if e.event_type == event_type]


def broken(alpha: str, beta: str = "beta") -> BrokenConfiguration:
    return BrokenConfiguration(
        beta=beta,
        alpha=alpha,
        legs=(),
        junctions=("c0",),
        terminal="c0",
        ev=np.zeros(1),
    )


def component(
    id_: str,
    start,
    end,
    kind: str = AUGMENTATION,
    source: str = "c1",
    distinguished: bool = False,
) -> ModuliComponent:
    boundary = () if start is None else (start, end)
    return ModuliComponent(
        id=id_,
        space=SpaceTag(kind, source),
        samples=(),
        boundary=boundary,
        distinguished=distinguished,
    )


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture
def circle_file(tmp_path) -> Path:
    path = tmp_path / "circle.scn"
    path.write_text(CIRCLE_TEXT)
    return path


@pytest.fixture
def settings(tmp_path) -> Settings:
    return Settings(output_dir=tmp_path / "out", grid=16)


@pytest.fixture
def event_bus() -> MockEventBus:
    return MockEventBus()


@pytest.fixture
def metrics() -> MetricsCollector:
    return MetricsCollector(enabled=True)


@pytest.fixture
def circle_components() -> dict[str, list[ModuliComponent] | ModuliComponent]:
    """The step graph of a circle: the star step to alpha A, then two steps between A and B.

    Also holds a closed component and a second, non-distinguished star component.
    """
    zero = ZeroLength("star", np.zeros(1))
    star = component("star#0", zero, broken("A"), kind=STAR, source="star", distinguished=True)
    extra = component("star#1", broken("B", beta="b2"), broken("B", beta="b3"), kind=STAR, source="star")
    down = component("c1#0", broken("A"), broken("B"))
    back = component("c1#1", broken("B"), broken("A"))
    closed = component("c1#2", None, None)
    return {"star": [star, extra], "c1": [down, back, closed]}
