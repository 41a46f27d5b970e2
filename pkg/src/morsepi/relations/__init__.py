"""Relators of the loop group and the comparison with the edge-path group."""

from morsepi.relations.harvest import (
    Contraction,
    RelationHarvester,
    candidate_words,
    contract_loop,
    oracle_generator_loops,
    relation_type1,
)
from morsepi.relations.oracle_compare import Verdict, compare_with_oracle, oracle_image
from morsepi.relations.patches import (
    DiscVerdict,
    OpenEdge,
    PatchLine,
    RelationContext,
    RelationPatch,
    StepExtension,
    StraightHomotopy,
    build_patches,
    evaluate_patch_disc,
    extract_patch_line,
    line_relator,
    straight_homotopy,
)
from morsepi.relations.presentation import TYPE1, TYPE2, Presentation, Relator, build_quotient, tietze

__all__ = [
    "Contraction",
    "RelationHarvester",
    "candidate_words",
    "contract_loop",
    "oracle_generator_loops",
    "relation_type1",
    "Verdict",
    "compare_with_oracle",
    "oracle_image",
    "DiscVerdict",
    "OpenEdge",
    "PatchLine",
    "RelationContext",
    "RelationPatch",
    "StepExtension",
    "StraightHomotopy",
    "build_patches",
    "evaluate_patch_disc",
    "extract_patch_line",
    "line_relator",
    "straight_homotopy",
    "TYPE1",
    "TYPE2",
    "Presentation",
    "Relator",
    "build_quotient",
    "tietze",
]
