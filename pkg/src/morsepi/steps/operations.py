"""Building steps from components, and evaluating loops into the oracle group."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from morsepi.exceptions import InconsistentComponentError, LoopProjectionError, ValidationError
from morsepi.flowfield.data import StableMorseData
from morsepi.geometry.manifold import ManifoldModel
from morsepi.geometry.oracle import OraclePresentation, project_loop
from morsepi.geometry.triangulation import Triangulation
from morsepi.geometry.words import Word, invert_word
from morsepi.moduli.types import ModuliComponent
from morsepi.observability.logging import get_logger
from morsepi.steps.model import MorseCoStep, MorseLoop, MorseStep, StepTable

logger = get_logger(__name__)

# Largest model distance between consecutive points handed to the projection
EV_SPACING = 0.05
REFINEMENTS = 4


def make_steps(
    components: Iterable[ModuliComponent], co: bool = False, first_index: int = 1
) -> list[MorseStep]:
    """Both orientations of every boundary-bearing component.

    Closed components carry no step. A complete component with a single
    classified endpoint means the trace went wrong and aborts the run.
    """
    kind = MorseCoStep if co else MorseStep
    steps: list[MorseStep] = []
    index = first_index
    for component in components:
        if component.is_closed:
            continue
        if not component.has_boundary:
            raise InconsistentComponentError(
                "Component with exactly one classified endpoint",
                component_id=component.id,
                details={"boundary": [str(b) for b in component.boundary]},
            )
        through = component.space.source or "M"
        step = kind(index=index, component=component, through=through)
        steps += [step, step.reversed()]
        index += 1
    logger.debug("Steps built", steps=len(steps), co=co)
    return steps


def build_table(components: Iterable[ModuliComponent], base_label: str, co: bool = False) -> StepTable:
    """The step table of an inventory, the distinguished component first."""
    ordered = sorted(components, key=lambda c: (not c.distinguished, c.space.kind != "star", c.id))
    return StepTable(make_steps(ordered, co=co), base_label)


def close_free_loop(table: StepTable, path: Sequence[int], free: Sequence[int]) -> MorseLoop:
    """Based loop ``path . free . path^-1`` from a free loop and a path reaching its start."""
    if not free:
        return MorseLoop(())
    table.check_consecutive(free, based=False)
    if table.node_of(free[-1]) != table.node_of(free[0], end=False):
        raise ValidationError("Free loop does not close up", field="free")
    if path:
        table.check_consecutive(tuple(path) + (free[0],), based=False)
    elif table.node_of(free[0], end=False) != table.root:
        raise ValidationError("Free loop needs a path from the zero-length trajectory", field="path")
    return MorseLoop(tuple(path) + tuple(free) + invert_word(path))


def ev_path(
    table: StepTable, data: StableMorseData, word: Sequence[int], stride: int = 1
) -> np.ndarray:
    """Concatenated ev+ paths of the steps, closed at the base point."""
    base = data.model.normalize(data.base_point)
    points = [base]
    for letter in word:
        segment = table.step(letter).ev_path(data, stride)
        if len(segment) and data.model.distance(points[-1], segment[0]) < 1e-12:
            segment = segment[1:]
        points.extend(segment)
    if data.model.distance(points[-1], base) > 1e-12:
        points.append(base)
    return np.array(points)


def densify(model: ManifoldModel, points: np.ndarray, spacing: float) -> np.ndarray:
    """Insert points along short paths so consecutive points are ``spacing`` apart at most."""
    out = [points[0]]
    for p, q in zip(points, points[1:]):
        gap = model.distance(p, q)
        pieces = max(1, int(np.ceil(gap / spacing)))
        out.extend(model.geodesic(p, q, k / pieces) for k in range(1, pieces + 1))
    return np.array(out)


def project_path(
    model: ManifoldModel,
    tri: Triangulation,
    oracle: OraclePresentation,
    points: np.ndarray,
    refinements: int = REFINEMENTS,
) -> Word:
    """Oracle word of a based polyline, densified until the projection succeeds."""
    spacing = EV_SPACING
    for attempt in range(refinements + 1):
        try:
            return project_loop(model, tri, densify(model, points, spacing), oracle)
        except LoopProjectionError as e:
            if attempt == refinements:
                raise LoopProjectionError(
                    "Evaluation path too coarse for the triangulation",
                    index=e.index,
                    details={"refinements": refinements, "spacing": spacing},
                ) from e
            spacing *= 0.5
    raise AssertionError("unreachable")


def evaluate(
    loop: MorseLoop,
    table: StepTable,
    data: StableMorseData,
    tri: Triangulation,
    oracle: OraclePresentation,
    stride: int = 1,
) -> Word:
    """Oracle word of ev of a based loop; the empty loop evaluates to the empty word."""
    if not loop.based:
        raise ValidationError("Only based loops evaluate to oracle words", field="loop")
    if not loop.word:
        return ()
    table.check_consecutive(loop.word)
    return project_path(data.model, tri, oracle, ev_path(table, data, loop.word, stride))


def generator_images(
    table: StepTable, data: StableMorseData, tri: Triangulation, oracle: OraclePresentation
) -> dict[int, Word]:
    """Oracle word of the fundamental loop of every generator step, keyed 1..g."""
    return {
        k + 1: evaluate(table.fundamental_loop(index), table, data, tri, oracle)
        for k, index in enumerate(table.generators)
    }
