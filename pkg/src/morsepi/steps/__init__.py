"""Morse steps and loops: generators of the loop group and their evaluation."""

from morsepi.steps.model import MorseCoStep, MorseLoop, MorseStep, StepTable, consecutive, endpoint_node, reduce
from morsepi.steps.operations import (
    build_table,
    close_free_loop,
    densify,
    ev_path,
    evaluate,
    generator_images,
    make_steps,
    project_path,
)

__all__ = [
    "MorseCoStep",
    "MorseLoop",
    "MorseStep",
    "StepTable",
    "endpoint_node",
    "build_table",
    "close_free_loop",
    "consecutive",
    "densify",
    "ev_path",
    "evaluate",
    "generator_images",
    "make_steps",
    "project_path",
    "reduce",
]
