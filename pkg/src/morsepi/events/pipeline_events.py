"""Pipeline stage events."""

from dataclasses import dataclass

from morsepi.events.base import Event


@dataclass
class CriticalPointsFoundEvent(Event):
    """Event fired once the critical points of a scenario are known."""

    count: int
    indices: tuple[int, ...]

    def __init__(self, scenario: str, indices: tuple[int, ...], **kwargs):
        super().__init__(
            event_id=kwargs.get("event_id"),
            event_type="critical.found",
            timestamp=kwargs.get("timestamp"),
            scenario=scenario,
            metadata=kwargs.get("metadata", {}),
        )
        self.count = len(indices)
        self.indices = indices


@dataclass
class ComponentTracedEvent(Event):
    """Event fired when a moduli component has been traced and classified."""

    component_id: str
    space: str
    boundary_kinds: tuple[str, ...]

    def __init__(self, scenario: str, component_id: str, space: str, boundary_kinds, **kwargs):
        super().__init__(
            event_id=kwargs.get("event_id"),
            event_type="moduli.component",
            timestamp=kwargs.get("timestamp"),
            scenario=scenario,
            metadata=kwargs.get("metadata", {}),
        )
        self.component_id = component_id
        self.space = space
        self.boundary_kinds = tuple(boundary_kinds)


@dataclass
class WalkCompletedEvent(Event):
    """Event fired after a crocodile walk terminates."""

    direction: str
    corners: int
    word: str

    def __init__(self, scenario: str, direction: str, corners: int, word: str, **kwargs):
        super().__init__(
            event_id=kwargs.get("event_id"),
            event_type="walk.completed",
            timestamp=kwargs.get("timestamp"),
            scenario=scenario,
            metadata=kwargs.get("metadata", {}),
        )
        self.direction = direction
        self.corners = corners
        self.word = word


@dataclass
class RelatorHarvestedEvent(Event):
    """Event fired for each relator added to the presentation."""

    kind: str
    word: str

    def __init__(self, scenario: str, kind: str, word: str, **kwargs):
        super().__init__(
            event_id=kwargs.get("event_id"),
            event_type="relations.relator",
            timestamp=kwargs.get("timestamp"),
            scenario=scenario,
            metadata=kwargs.get("metadata", {}),
        )
        self.kind = kind
        self.word = word


@dataclass
class VerdictReachedEvent(Event):
    """Event fired when the oracle comparison is done."""

    passed: bool
    group: str

    def __init__(self, scenario: str, passed: bool, group: str, **kwargs):
        super().__init__(
            event_id=kwargs.get("event_id"),
            event_type="relations.verdict",
            timestamp=kwargs.get("timestamp"),
            scenario=scenario,
            metadata=kwargs.get("metadata", {}),
        )
        self.passed = passed
        self.group = group
