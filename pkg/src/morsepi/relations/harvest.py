"""Harvesting relators: type 1 from walked loops, type 2 from contracted loops."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from morsepi.events import EventBus, RelatorHarvestedEvent
from morsepi.exceptions import PatchMatchingError, TransversalityError
from morsepi.geometry.manifold import ManifoldModel
from morsepi.geometry.oracle import GENERIC, OraclePresentation, vertex_path_points
from morsepi.geometry.triangulation import Triangulation
from morsepi.geometry.words import Word, concat_words, cyclic_normal_form, format_word, invert_word, reduce_word
from morsepi.observability.logging import get_logger
from morsepi.relations.oracle_compare import oracle_image
from morsepi.relations.patches import PatchLine, RelationContext, StraightHomotopy, evaluate_patch_disc, extract_patch_line
from morsepi.relations.presentation import TYPE1, TYPE2, Relator, build_quotient
from morsepi.steps.model import MorseLoop
from morsepi.steps.operations import ev_path

logger = get_logger(__name__)


def relation_type1(ctx: RelationContext, loop: MorseLoop, source: str = "loop") -> Relator:
    """loop . Theta(ev(loop))^-1, reduced."""
    if loop.is_empty:
        return Relator((), TYPE1, source)
    _, theta = ctx.walker.walk(ev_path(ctx.table, ctx.data, loop.word))
    steps = reduce_word(concat_words(loop.word, invert_word(theta.word)))
    return Relator(ctx.table.to_generators(steps), TYPE1, source, steps)


def _walk_near(ctx: RelationContext, homotopy: StraightHomotopy, s: float, rng: np.random.Generator):
    """Walk the loop at parameter s, nudging s inside [0, 1] when the walk loses transversality."""
    retry = ctx.settings.retry
    for attempt in Retrying(
        stop=stop_after_attempt(retry.max_attempts),
        retry=retry_if_exception_type(TransversalityError),
        reraise=True,
    ):
        with attempt:
            nudged = s
            if attempt.retry_state.attempt_number > 1 and 0.0 < s < 1.0:
                nudged = float(np.clip(s + rng.normal(scale=retry.jitter), 1e-9, 1.0 - 1e-9))
            _, theta = ctx.walker.walk(homotopy(nudged))
            return nudged, reduce_word(theta.word)
    raise AssertionError("unreachable")


@dataclass
class Contraction:
    source: str
    lines: list[PatchLine] = field(default_factory=list)
    relators: list[Relator] = field(default_factory=list)


def _line_relators(ctx: RelationContext, line: PatchLine, source: str) -> list[Relator]:
    """One relator per patch when every patch bounds a based disc, else the whole line."""
    label = f"{source}@s={line.s_range[0]:.9f}"
    try:
        for patch in line.patches:
            evaluate_patch_disc(patch, ctx)
    except PatchMatchingError:
        logger.warning("Patch boundaries are not based loops; keeping the line relator", source=label)
        evaluate_patch_disc(line, ctx)
        return [Relator(ctx.table.to_generators(line.relator), TYPE2, label, line.relator)]
    return [
        Relator(ctx.table.to_generators(p.relator), TYPE2, f"{label}#{p.index}", p.relator, p.conjugator)
        for p in line.patches
    ]


def contract_loop(
    ctx: RelationContext, points: np.ndarray, source: str = "loop", rng: np.random.Generator | None = None
) -> Contraction:
    """Type 2 relators along the straight-line contraction of a null-homotopic loop.

    The homotopy is sampled on a uniform grid; intervals whose ends carry
    different downward words are bisected down to the bifurcation
    tolerance and a patch line is extracted there. Intervals with equal
    words contribute nothing.
    """
    rng = rng or np.random.default_rng(ctx.settings.seed)
    config = ctx.settings.relations
    base = ctx.model.normalize(ctx.data.base_point)
    constant = np.repeat(base[None, :], len(points), axis=0)
    homotopy = StraightHomotopy(ctx.model, points, constant, samples=ctx.settings.walk.loop_samples)

    samples = [_walk_near(ctx, homotopy, s, rng) for s in np.linspace(0.0, 1.0, config.homotopy_samples)]
    result = Contraction(source)
    stack = list(zip(samples, samples[1:]))[::-1]
    while stack:
        (s0, w0), (s1, w1) = stack.pop()
        if w0 == w1:
            continue
        if s1 - s0 > config.bifurcation_tolerance:
            middle = _walk_near(ctx, homotopy, 0.5 * (s0 + s1), rng)
            stack.append((middle, (s1, w1)))
            stack.append(((s0, w0), middle))
            continue
        line = extract_patch_line(ctx, homotopy(s0), homotopy(s1), (s0, s1))
        result.lines.append(line)
        result.relators.extend(_line_relators(ctx, line, source))

    theta = samples[0][1]
    combined = reduce_word(concat_words(*(line.relator for line in result.lines)))
    if combined != theta:
        logger.warning(
            "Patch lines do not telescope to the walked word",
            source=source,
            word=format_word(theta),
            lines=format_word(combined),
        )
    logger.info("Loop contracted", source=source, lines=len(result.lines), relators=len(result.relators))
    return result


def oracle_generator_loops(
    model: ManifoldModel, tri: Triangulation, oracle: OraclePresentation, samples_per_edge: int = 16
) -> dict[int, np.ndarray]:
    """A based polyline for each oracle generator, one per distinct nontrivial class."""
    loops: dict[int, np.ndarray] = {}
    for k in range(1, len(oracle.generators) + 1):
        if oracle.kind != GENERIC:
            if oracle.is_trivial((k,)):
                continue
            if any(oracle.is_trivial((k, -j)) for j in loops):
                continue
        loops[k] = vertex_path_points(model, tri, oracle.generator_cycle(k), samples_per_edge)
    return loops


def candidate_words(generator_count: int, max_length: int) -> list[Word]:
    """Cyclically reduced words up to ``max_length``, one per rotation and inversion class."""
    letters = [x for g in range(1, generator_count + 1) for x in (g, -g)]
    seen: set[Word] = set()
    out: list[Word] = []
    for length in range(1, max_length + 1):
        for word in product(letters, repeat=length):
            key = cyclic_normal_form(word)
            if len(key) != length or key in seen:
                continue
            seen.add(key)
            out.append(key)
    return out


class RelationHarvester:
    """Collects type 1 and type 2 relators for the step generators."""

    def __init__(
        self,
        ctx: RelationContext,
        images: Mapping[int, Word],
        event_bus: EventBus | None = None,
        scenario: str = "",
    ):
        self.ctx = ctx
        self.images = dict(images)
        self.event_bus = event_bus
        self.scenario = scenario
        self.labels = ctx.table.generator_labels()
        self.rng = np.random.default_rng(ctx.settings.seed)
        self.lines: list[PatchLine] = []

    def _record(self, relators: Sequence[Relator]) -> None:
        for r in relators:
            if self.ctx.metrics:
                self.ctx.metrics.record_relator(r.kind)
            if self.event_bus:
                self.event_bus.publish(RelatorHarvestedEvent(self.scenario, r.kind, format_word(r.word)))

    def type1(self, loop: MorseLoop, source: str) -> Relator:
        relator = relation_type1(self.ctx, loop, source)
        self._record([relator])
        return relator

    def contract(self, loop: MorseLoop, source: str) -> list[Relator]:
        points = ev_path(self.ctx.table, self.ctx.data, loop.word)
        contraction = contract_loop(self.ctx, points, source, self.rng)
        self.lines.extend(contraction.lines)
        self._record(contraction.relators)
        return contraction.relators

    def generator_loops(self) -> list[tuple[MorseLoop, str]]:
        table = self.ctx.table
        return [(table.fundamental_loop(index), f"g{k + 1}") for k, index in enumerate(table.generators)]

    def _oracle_trivial(self, word: Word) -> bool:
        image = oracle_image(word, self.images)
        if not image:
            return True
        if self.ctx.oracle.kind == GENERIC:
            return False
        return self.ctx.oracle.is_trivial(image)

    def null_words(self) -> list[Word]:
        """Candidate words trivial in the oracle but not yet in the harvested quotient."""
        out = []
        max_length = self.ctx.settings.relations.max_relator_length
        for word in candidate_words(len(self.labels), max_length):
            if self._oracle_trivial(word):
                out.append(word)
        logger.debug("Null-homotopic candidates", count=len(out), max_length=max_length)
        return out

    def harvest(self, relators: Sequence[Relator] = (), include_type2: bool = True) -> list[Relator]:
        """Extend ``relators`` until every null candidate is trivial in the quotient."""
        relators = list(relators)
        if not include_type2:
            return relators
        for word in self.null_words():
            quotient = build_quotient(self.labels, relators)
            if quotient.is_trivial(word) is True:
                continue
            loop = self.ctx.table.from_generators(word)
            source = f"contract[{format_word(word)}]"
            relators.append(self.type1(loop, source))
            relators.extend(self.contract(loop, source))
        logger.info("Relators harvested", relators=len(relators), lines=len(self.lines))
        return relators
