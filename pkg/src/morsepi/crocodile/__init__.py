"""Crocodile walks, interval fiber products and functorial maps."""

from morsepi.crocodile.functorial import (
    BUILTIN_MAPS,
    Bump,
    SmoothMap,
    builtin_map,
    hybrid_regularity,
    pushforward,
    transport_base,
)
from morsepi.crocodile.intervals import IntervalMap, fiber_component
from morsepi.crocodile.sync import Attachment, Run, SynchronizedPair, attachment_map, synchronize
from morsepi.crocodile.walk import (
    DOWNWARD,
    LOWER,
    ONCE_BROKEN,
    TWICE_BROKEN,
    UPPER,
    UPWARD,
    ZERO_LENGTH_CORNER,
    Corner,
    CrocodileWalker,
    Edge,
    LoopPath,
    WalkTranscript,
    conjugate_loop,
    downward_walk,
    upward_walk,
)

__all__ = [
    "BUILTIN_MAPS",
    "Bump",
    "SmoothMap",
    "builtin_map",
    "hybrid_regularity",
    "pushforward",
    "transport_base",
    "IntervalMap",
    "fiber_component",
    "Attachment",
    "Run",
    "SynchronizedPair",
    "attachment_map",
    "synchronize",
    "DOWNWARD",
    "LOWER",
    "ONCE_BROKEN",
    "TWICE_BROKEN",
    "UPPER",
    "UPWARD",
    "ZERO_LENGTH_CORNER",
    "Corner",
    "CrocodileWalker",
    "Edge",
    "LoopPath",
    "WalkTranscript",
    "conjugate_loop",
    "downward_walk",
    "upward_walk",
]
