"""Builtin manifolds, triangulations and the edge-path oracle."""

from morsepi.geometry.abelian import AbelianInvariants, abelianize
from morsepi.geometry.manifold import (
    BUILTIN_NAMES,
    Chart,
    ManifoldModel,
    ResolutionSettings,
    build_builtin,
    wrap_angle,
)
from morsepi.geometry.oracle import (
    FREE_ABELIAN_2,
    FREE_CYCLIC,
    GENERIC,
    TRIVIAL,
    OraclePresentation,
    edge_path_presentation,
    normal_form_kind,
    project_loop,
    simplify,
    vertex_path_points,
)
from morsepi.geometry.triangulation import Triangulation, triangulate
from morsepi.geometry.words import (
    Word,
    concat_words,
    cyclic_normal_form,
    format_word,
    invert_word,
    reduce_word,
)

__all__ = [
    "AbelianInvariants",
    "abelianize",
    "BUILTIN_NAMES",
    "Chart",
    "ManifoldModel",
    "ResolutionSettings",
    "build_builtin",
    "wrap_angle",
    "FREE_ABELIAN_2",
    "FREE_CYCLIC",
    "GENERIC",
    "TRIVIAL",
    "OraclePresentation",
    "edge_path_presentation",
    "normal_form_kind",
    "project_loop",
    "simplify",
    "vertex_path_points",
    "Triangulation",
    "triangulate",
    "Word",
    "concat_words",
    "cyclic_normal_form",
    "format_word",
    "invert_word",
    "reduce_word",
]
