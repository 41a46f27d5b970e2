"""Relation patches read off a synchronized pair of walks along a homotopy.

Along a one-parameter family of loops the downward word Theta changes
only at isolated parameters. Around such a parameter the downward walks
on either side are synchronized with one upward walk of the middle loop;
every upper step of the upward walk then bounds a patch whose bottom
compares the letters crossed on the left with those crossed on the right.
Each side of a patch carries the bouncing pairs met at its subdivision
times: the upward configuration against the downward one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from morsepi.config import Settings
from morsepi.crocodile.sync import RAMP, Attachment, Run, SynchronizedPair, synchronize
from morsepi.crocodile.walk import LOWER, UPPER, CrocodileWalker, LoopPath, conjugate_loop
from morsepi.exceptions import GeometryError, PatchDiscError, PatchMatchingError, ValidationError
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import FlowArc
from morsepi.geometry.manifold import ManifoldModel, SphereModel
from morsepi.geometry.oracle import OraclePresentation
from morsepi.geometry.triangulation import Triangulation
from morsepi.geometry.words import Word, concat_words, format_word, invert_word, reduce_word
from morsepi.moduli.dagger import DaggerSample, EvCurve, build_dagger
from morsepi.moduli.inventory import ModuliInventory
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector
from morsepi.steps.model import MorseLoop, StepTable
from morsepi.steps.operations import evaluate

logger = get_logger(__name__)

LEFT = "left"
RIGHT = "right"


@dataclass
class RelationContext:
    """Everything a relation needs: data, both walkers and the oracle."""

    data: StableMorseData
    inventory: ModuliInventory
    table: StepTable
    walker: CrocodileWalker
    up_walker: CrocodileWalker
    tri: Triangulation
    oracle: OraclePresentation
    settings: Settings = field(default_factory=Settings)
    metrics: MetricsCollector | None = None

    @property
    def model(self) -> ManifoldModel:
        return self.data.model


@dataclass(frozen=True)
class StepExtension:
    """One side of a patch: the downward letters crossed while the upward walk sat on one upper step.

    ``samples`` are the bouncing pairs at ``times``; ``breaks`` the upper
    edges of the downward walk between them.
    """

    root: str
    side: str
    times: tuple[Fraction, ...]
    letters: Word
    breaks: tuple[str, ...]
    upper_arc: str
    samples: tuple[DaggerSample, ...] = ()

    @property
    def gap(self) -> float:
        return max((s.gap for s in self.samples), default=0.0)

    def extended(self, before: Sequence[int] = (), after: Sequence[int] = ()) -> "StepExtension":
        return replace(self, letters=(*before, *self.letters, *after))


@dataclass(frozen=True)
class OpenEdge:
    """Where two neighbouring patches meet: the configurations seen from either side."""

    upper_arc: str
    left: str
    right: str
    distance: float

    @property
    def matched(self) -> bool:
        return self.left == self.right


@dataclass(frozen=True)
class RelationPatch:
    index: int
    root: str
    paths: tuple[StepExtension, StepExtension]
    conjugator: Word
    open_edges: tuple[OpenEdge, ...] = ()

    @property
    def bottom(self) -> Word:
        left, right = self.paths
        return reduce_word(concat_words(left.letters, invert_word(right.letters)))

    @property
    def relator(self) -> Word:
        return reduce_word(concat_words(self.conjugator, self.bottom, invert_word(self.conjugator)))

    def describe(self) -> str:
        left, right = self.paths
        return (
            f"patch {self.index}: root {self.root}, upper {left.upper_arc}, "
            f"left [{format_word(left.letters)}], right [{format_word(right.letters)}], "
            f"conjugator [{format_word(self.conjugator)}], "
            f"bounces {len(left.samples)}+{len(right.samples)} gap {self.gap:.3e}"
        )

    @property
    def gap(self) -> float:
        return max(path.gap for path in self.paths)


@dataclass(frozen=True)
class PatchLine:
    """All patches met at one change of the downward word, and their combined relator."""

    patches: tuple[RelationPatch, ...]
    relator: Word
    left_word: Word
    right_word: Word
    s_range: tuple[float, float] = (0.0, 1.0)

    @property
    def relator_loop(self) -> MorseLoop:
        return MorseLoop(self.relator)

    def lines(self) -> list[str]:
        a, b = self.s_range
        out = [
            f"# patch line over s in [{a:.12f}, {b:.12f}]",
            f"left: {format_word(self.left_word)}",
            f"right: {format_word(self.right_word)}",
        ]
        out.extend(p.describe() for p in self.patches)
        out.append(f"relator: {format_word(self.relator)}")
        return out


@dataclass(frozen=True)
class DiscVerdict:
    boundary: tuple[str, ...]
    oracle_word: Word
    trivial: bool | None


class StraightHomotopy:
    """Straight-line homotopy rel base point between two loops, taken in the universal cover.

    Angle models interpolate the unwrapped lifts; the sphere interpolates
    embedded points and renormalizes.
    """

    def __init__(self, model: ManifoldModel, start: np.ndarray, end: np.ndarray, samples: int = 240):
        self.model = model
        self.samples = samples
        lift0 = model.lift(LoopPath.from_points(model, start).resample(samples))
        lift1 = model.lift(LoopPath.from_points(model, end).resample(samples))
        lift1 = lift1 - lift1[0] + lift0[0]
        if np.linalg.norm(lift0[-1] - lift1[-1]) > 1e-6:
            raise ValidationError(
                "Loops are not homotopic rel base point",
                field="loop",
                details={"gap": float(np.linalg.norm(lift0[-1] - lift1[-1]))},
            )
        self.lift0 = lift0
        self.lift1 = lift1
        self.base = model.normalize(model.descend(lift0[:1])[0])

    def __call__(self, s: float) -> np.ndarray:
        combined = (1.0 - s) * self.lift0 + s * self.lift1
        if isinstance(self.model, SphereModel):
            norms = np.linalg.norm(combined, axis=1)
            if norms.min() < 1e-6:
                raise ValidationError("Straight homotopy passes through the origin", field="loop", details={"s": s})
        points = self.model.descend(combined)
        points[0] = points[-1] = self.base
        return points


def straight_homotopy(model: ManifoldModel, start: np.ndarray, end: np.ndarray, samples: int = 240):
    return StraightHomotopy(model, start, end, samples)


def _configuration(
    walker: CrocodileWalker, attachment: Attachment, s: Fraction
) -> tuple[str, np.ndarray, FlowArc | None]:
    """The configuration a walk sits on at walk time ``s``: its id, ev+ point and alpha arc."""
    data = walker.data
    span = attachment.span_at(s, prefer=UPPER)
    if span.edge == RAMP or attachment.edge_kind(span) == LOWER:
        return f"zero-length({data.base_label})", data.model.normalize(data.base_point), None
    edge = attachment.transcript.edges[span.edge]
    alpha = walker.inventory.rigid(edge.alpha)
    return edge.alpha or edge.component_id, alpha.ev_plus(data), alpha.arc


def _family(ctx: RelationContext, attachment: Attachment, s: Fraction) -> tuple[str, np.ndarray]:
    family, ev, _ = _configuration(ctx.walker, attachment, s)
    return family, ev


def _bounce(
    ctx: RelationContext, pair: SynchronizedPair, loops: tuple[LoopPath, LoopPath], r: Fraction
) -> DaggerSample:
    """The bouncing pair met at common time ``r``.

    The upward configuration bounces off the middle loop and the downward
    one off its own loop at the same loop time; the gap is their distance.
    """
    up_loop, down_loop = loops
    t, s = pair.phi_up(r), pair.phi_down(r)
    up_id, _, up_arc = _configuration(ctx.up_walker, pair.up, t)
    down_id, _, down_arc = _configuration(ctx.walker, pair.down, s)
    up_point = up_loop(float(pair.up.map(t)))
    head, tail = pair.frame
    tau = float(pair.down.map(s))
    down_point = down_loop((tau - head) / (tail - head)) if head <= tau <= tail and tail > head else up_point
    left = EvCurve(up_id, np.array([float(r)]), np.array([up_point]), (up_arc,))
    right = EvCurve(down_id, np.array([float(r)]), np.array([down_point]), (down_arc,))
    [sample] = build_dagger(ctx.model, left, right, tolerance=float("inf"))
    return sample


def _bounces(
    ctx: RelationContext, pair: SynchronizedPair, times: Sequence[Fraction]
) -> tuple[DaggerSample, ...]:
    loops = (
        LoopPath.from_points(ctx.model, pair.up.transcript.loop),
        LoopPath.from_points(ctx.model, pair.down.transcript.loop),
    )
    return tuple(_bounce(ctx, pair, loops, r) for r in times)


def _extension(ctx: RelationContext, pair: SynchronizedPair, run: Run, side: str) -> StepExtension:
    up_edge = pair.up.transcript.edges[run.up_edge]
    breaks = []
    for k in run.down_edges:
        if k != RAMP and pair.down.transcript.edges[k].kind == UPPER:
            breaks.append(pair.down.transcript.edges[k].component_id)
    times = (run.start, *run.down_times, run.end)
    return StepExtension(
        root=up_edge.component_id.split("|")[0],
        side=side,
        times=times,
        letters=tuple(run.letters),
        breaks=tuple(breaks),
        upper_arc=up_edge.component_id,
        samples=_bounces(ctx, pair, times),
    )


def _is_upper(pair: SynchronizedPair, run: Run) -> bool:
    return run.up_edge != RAMP and pair.up.transcript.edges[run.up_edge].kind == UPPER


def _single_patch(
    ctx: RelationContext, left: SynchronizedPair, right: SynchronizedPair
) -> list[RelationPatch]:
    def whole(pair: SynchronizedPair, side: str) -> StepExtension:
        letters = tuple(letter for _, letter in pair.down_letters())
        times = (Fraction(0), Fraction(1))
        samples = _bounces(ctx, pair, times)
        return StepExtension("", side, times, letters, (), "", samples)

    return [RelationPatch(0, "", (whole(left, LEFT), whole(right, RIGHT)), ())]


def _open_edge(
    ctx: RelationContext, left: SynchronizedPair, right: SynchronizedPair, lrun: Run, rrun: Run
) -> OpenEdge:
    upper = left.up.transcript.edges[lrun.up_edge].component_id if lrun.up_edge != RAMP else "ramp"
    left_family, left_ev = _family(ctx, left.down, left.phi_down(lrun.start))
    right_family, right_ev = _family(ctx, right.down, right.phi_down(rrun.start))
    return OpenEdge(upper, left_family, right_family, ctx.model.distance(left_ev, right_ev))


def build_patches(ctx: RelationContext, left: SynchronizedPair, right: SynchronizedPair) -> list[RelationPatch]:
    """Patches from matching runs of the two synchronized pairs.

    Letters crossed while the upward walk sits on a lower step are carried
    into the next patch. When the two sides see different run sequences
    the whole difference is taken as one patch.
    """
    lruns, rruns = left.runs(), right.runs()
    if [r.up_edge for r in lruns] != [r.up_edge for r in rruns]:
        logger.warning("Synchronized runs differ between sides; using one patch", left=len(lruns), right=len(rruns))
        return _single_patch(ctx, left, right)

    tolerance = ctx.settings.relations.degenerate_edge_tolerance
    uppers = [k for k, run in enumerate(lruns) if _is_upper(left, run)]
    edges: dict[int, OpenEdge] = {}
    for k, (lrun, rrun) in enumerate(zip(lruns, rruns)):
        if _is_upper(left, lrun):
            continue
        edge = _open_edge(ctx, left, right, lrun, rrun)
        outermost = not uppers or k < uppers[0] or k > uppers[-1]
        if outermost and edge.distance < tolerance:
            continue
        if not edge.matched and edge.distance >= tolerance:
            raise PatchMatchingError(
                "Neighbouring patches disagree along an open edge",
                patch_index=len([u for u in uppers if u < k]),
                details={"left": edge.left, "right": edge.right, "distance": edge.distance},
            )
        edges[k] = edge

    patches: list[RelationPatch] = []
    prefix: Word = ()
    carried_left: list[int] = []
    carried_right: list[int] = []
    for k, (lrun, rrun) in enumerate(zip(lruns, rruns)):
        if not _is_upper(left, lrun):
            carried_left.extend(lrun.letters)
            carried_right.extend(rrun.letters)
            continue
        lext, rext = _extension(ctx, left, lrun, LEFT), _extension(ctx, right, rrun, RIGHT)
        if carried_left or carried_right:
            lext, rext = lext.extended(before=carried_left), rext.extended(before=carried_right)
            carried_left, carried_right = [], []
        bounding = tuple(edges[j] for j in (k - 1, k + 1) if j in edges)
        patches.append(RelationPatch(len(patches), lext.root, (lext, rext), prefix, bounding))
        prefix = reduce_word(concat_words(prefix, lext.letters))

    if carried_left or carried_right:
        if not patches:
            return _single_patch(ctx, left, right)
        last = patches[-1]
        lext, rext = last.paths
        patches[-1] = RelationPatch(
            last.index,
            last.root,
            (
                lext.extended(after=carried_left),
                rext.extended(after=carried_right),
            ),
            last.conjugator,
            last.open_edges,
        )
    return patches


def line_relator(patches: list[RelationPatch]) -> Word:
    """Product of the conjugated patch bottoms, last patch first."""
    return reduce_word(concat_words(*(p.relator for p in reversed(patches))))


def extract_patch_line(
    ctx: RelationContext,
    start: np.ndarray,
    end: np.ndarray,
    s_range: tuple[float, float] = (0.0, 1.0),
) -> PatchLine:
    """Patch line between two nearby based loops.

    Equal downward words give an empty line. Otherwise both sides are
    synchronized with the upward walk of the middle loop, conjugated by the
    base path into the aux point, and the line relator is checked against
    Theta(start) Theta(end)^-1.
    """
    left_transcript, left = ctx.walker.walk(start)
    right_transcript, right = ctx.walker.walk(end)
    left_word, right_word = reduce_word(left.word), reduce_word(right.word)
    if left_word == right_word:
        return PatchLine((), (), left_word, right_word, s_range)

    homotopy = StraightHomotopy(ctx.model, start, end, samples=max(len(start), len(end)))
    middle = homotopy(0.5)
    conjugated, frame = conjugate_loop(ctx.model, middle, ctx.data.base_path())
    up_transcript, _ = ctx.up_walker.walk(conjugated)

    left_pair = synchronize(left_transcript, up_transcript, frame)
    right_pair = synchronize(right_transcript, up_transcript, frame)
    patches = build_patches(ctx, left_pair, right_pair)
    relator = line_relator(patches)
    expected = reduce_word(concat_words(left_word, invert_word(right_word)))
    if relator != expected:
        raise PatchMatchingError(
            "Patch bottoms do not compose to the change of word",
            details={"relator": list(relator), "expected": list(expected)},
        )
    line = PatchLine(tuple(patches), relator, left_word, right_word, s_range)
    logger.info(
        "Patch line extracted",
        patches=len(patches),
        relator=format_word(relator),
        bounce_gap=max((p.gap for p in patches), default=0.0),
        s_low=s_range[0],
        s_high=s_range[1],
    )
    return line


def evaluate_patch_disc(item: RelationPatch | PatchLine, ctx: RelationContext) -> DiscVerdict:
    """Evaluate a patch's relator and require it to be trivial in the oracle.

    A generic oracle cannot decide the word problem; the verdict is then
    left open unless the word freely reduces away.
    """
    word = item.relator
    if isinstance(item, PatchLine):
        boundary = tuple(p.describe() for p in item.patches)
    else:
        boundary = (item.describe(),)
    try:
        image = evaluate(MorseLoop(word), ctx.table, ctx.data, ctx.tri, ctx.oracle)
    except ValidationError as e:
        index = item.index if isinstance(item, RelationPatch) else None
        raise PatchMatchingError("Patch boundary is not a consecutive loop", patch_index=index, details=e.details) from e
    try:
        trivial: bool | None = ctx.oracle.is_trivial(image)
    except GeometryError:
        trivial = True if not reduce_word(image) else None
    if trivial is False:
        raise PatchDiscError("Patch bottom evaluates to a nontrivial class", word=image)
    return DiscVerdict(boundary, image, trivial)
