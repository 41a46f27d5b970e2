"""Moduli spaces of flow lines: rigid arcs, traced components, fiber products."""

from morsepi.moduli.components import ComponentEnumerator, polyline_distance, polyline_hausdorff
from morsepi.moduli.connecting import (
    coaugmentation_samples,
    enumerate_augmentations,
    enumerate_connecting,
    enumerate_star_arcs,
)
from morsepi.moduli.continuation import Evaluation, Trace, TracePoint, Tracer
from morsepi.moduli.dagger import DaggerSample, EvCurve, build_dagger, build_hybrid
from morsepi.moduli.dimensions import expected_dimension, legal_boundary
from morsepi.moduli.inventory import ModuliInventory, build_inventory, enumerate_component_space
from morsepi.moduli.multiplicity import MultiplicityTable, multiplicities
from morsepi.moduli.shooting import AdaptiveShooter, Shot
from morsepi.moduli.types import (
    AUGMENTATION,
    CONNECTING,
    STAR,
    BrokenConfiguration,
    ComponentSample,
    ModuliComponent,
    RigidArc,
    SpaceTag,
    ZeroLength,
)

__all__ = [
    "ComponentEnumerator",
    "polyline_distance",
    "polyline_hausdorff",
    "coaugmentation_samples",
    "enumerate_augmentations",
    "enumerate_connecting",
    "enumerate_star_arcs",
    "Evaluation",
    "Trace",
    "TracePoint",
    "Tracer",
    "DaggerSample",
    "EvCurve",
    "build_dagger",
    "build_hybrid",
    "expected_dimension",
    "legal_boundary",
    "ModuliInventory",
    "build_inventory",
    "enumerate_component_space",
    "MultiplicityTable",
    "multiplicities",
    "AdaptiveShooter",
    "Shot",
    "AUGMENTATION",
    "CONNECTING",
    "STAR",
    "BrokenConfiguration",
    "ComponentSample",
    "ModuliComponent",
    "RigidArc",
    "SpaceTag",
    "ZeroLength",
]
