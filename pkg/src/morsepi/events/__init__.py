"""Event system for pipeline stages."""

from morsepi.events.base import Event, EventBus, EventHandler, SimpleEventBus
from morsepi.events.pipeline_events import (
    ComponentTracedEvent,
    CriticalPointsFoundEvent,
    RelatorHarvestedEvent,
    VerdictReachedEvent,
    WalkCompletedEvent,
)

__all__ = [
    "Event",
    "EventBus",
    "EventHandler",
    "SimpleEventBus",
    "CriticalPointsFoundEvent",
    "ComponentTracedEvent",
    "WalkCompletedEvent",
    "RelatorHarvestedEvent",
    "VerdictReachedEvent",
]
