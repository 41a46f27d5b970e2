"""Stable Morse data, critical points, the hybrid flow and regularity margins."""

from morsepi.flowfield.critical import CriticalPoint, find_critical_points
from morsepi.flowfield.data import AUX, STAR, Perturbation, StableMorseData
from morsepi.flowfield.integrator import (
    BACKWARD,
    ESCAPE,
    FORWARD,
    INTERIOR,
    NEAR_CRITICAL,
    SLICE_MINUS,
    SLICE_PLUS,
    BallPassage,
    Crossing,
    Endpoint,
    FlowArc,
    FlowEngine,
)
from morsepi.flowfield.regularity import (
    Margin,
    RegularityReport,
    check_regularity,
    choose_aux_base_point,
)
from morsepi.flowfield.scenario import Scenario, load_scenario, parse_scenario
from morsepi.flowfield.terms import CompiledTerm, compile_term

__all__ = [
    "CriticalPoint",
    "find_critical_points",
    "AUX",
    "STAR",
    "Perturbation",
    "StableMorseData",
    "BACKWARD",
    "ESCAPE",
    "FORWARD",
    "INTERIOR",
    "NEAR_CRITICAL",
    "SLICE_MINUS",
    "SLICE_PLUS",
    "BallPassage",
    "Crossing",
    "Endpoint",
    "FlowArc",
    "FlowEngine",
    "Margin",
    "RegularityReport",
    "check_regularity",
    "choose_aux_base_point",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "CompiledTerm",
    "compile_term",
]
