"""Attachment maps of walks and the synchronization of a downward with an upward walk."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from morsepi.crocodile.intervals import ONE, ZERO, IntervalMap, fiber_component
from morsepi.crocodile.walk import LOWER, UPPER, WalkTranscript
from morsepi.exceptions import FiberProductError
from morsepi.geometry.words import Word, reduce_word
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

# Loop times are snapped to this dyadic grid before exact arithmetic
_GRID = 2**40

# Edge index of the delta extensions at either end of a framed walk
RAMP = -1


def _exact(tau: float) -> Fraction:
    return Fraction(round(tau * _GRID), _GRID)


@dataclass(frozen=True)
class Span:
    """Domain interval of the attachment map covered by one edge."""

    start: Fraction
    end: Fraction
    edge: int

    def contains(self, s: Fraction) -> bool:
        return self.start <= s <= self.end


@dataclass(frozen=True)
class Attachment:
    """Walk time -> loop time, with exact plateaus over the lower steps."""

    map: IntervalMap
    spans: tuple[Span, ...]
    transcript: WalkTranscript

    def edge_kind(self, span: Span) -> str:
        return LOWER if span.edge == RAMP else self.transcript.edges[span.edge].kind

    def span_at(self, s: Fraction, prefer: str = UPPER) -> Span:
        """The span containing ``s``, preferring spans of the given kind on shared ends."""
        found = [span for span in self.spans if span.contains(s)]
        if not found:
            raise FiberProductError("Walk time outside every edge", value=s)
        for span in found:
            if self.edge_kind(span) == prefer:
                return span
        return found[0]


def attachment_map(
    transcript: WalkTranscript, frame: tuple[float, float] = (0.0, 1.0), compress: bool = True
) -> Attachment:
    """Piecewise-linear attachment map of a walk.

    With a ``frame`` (head, tail) the walk's loop is taken to occupy
    [head, tail] of a longer loop, and ramps at both ends extend the first
    and last steps along the added paths.
    """
    head, tail = _exact(frame[0]), _exact(frame[1])
    width = tail - head
    values: list[Fraction] = []
    spans: list[tuple[int, int, int]] = []
    if head > ZERO:
        values.append(ZERO)
    for k, edge in enumerate(transcript.edges):
        taus = [head + width * _exact(t) for t in edge.taus]
        if edge.kind == LOWER:
            taus = [taus[0], taus[0]]
        else:
            taus = [t for i, t in enumerate(taus) if i == 0 or t != taus[i - 1]]
        if values and values[-1] == taus[0]:
            first = len(values) - 1
            values.extend(taus[1:])
        else:
            if values:
                spans.append((len(values) - 1, len(values), RAMP))
            first = len(values)
            values.extend(taus)
        spans.append((first, len(values) - 1, k))
    if tail < ONE:
        spans.append((len(values) - 1, len(values), RAMP))
        values.append(ONE)

    full = IntervalMap.uniform(values)
    if compress:
        keep = {i for span in spans for i in span[:2]}
        indices = full.kept_indices(keep)
    else:
        indices = list(range(len(values)))
    position = {old: new for new, old in enumerate(indices)}
    compact = IntervalMap(tuple(full.domain[i] for i in indices), tuple(full.values[i] for i in indices))
    return Attachment(
        compact,
        tuple(Span(compact.domain[position[a]], compact.domain[position[b]], k) for a, b, k in spans),
        transcript,
    )


@dataclass(frozen=True)
class Run:
    """A maximal stretch of common time during which the upward walk stays on one edge.

    ``letters`` are the downward steps crossed meanwhile, signed by the
    direction of crossing; ``down_edges`` the downward edges visited.
    """

    up_edge: int
    start: Fraction
    end: Fraction
    letters: tuple[int, ...]
    down_edges: tuple[int, ...]
    down_times: tuple[Fraction, ...]


@dataclass(frozen=True)
class SynchronizedPair:
    down: Attachment
    up: Attachment
    phi_down: IntervalMap
    phi_up: IntervalMap
    frame: tuple[float, float] = (0.0, 1.0)

    @property
    def grid(self) -> tuple[Fraction, ...]:
        return self.phi_down.domain

    def _segments(self):
        r, s, t = self.phi_down.domain, self.phi_down.values, self.phi_up.values
        for k in range(len(r) - 1):
            yield r[k], r[k + 1], s[k], s[k + 1], t[k], t[k + 1]

    def _crossed(self, s0: Fraction, s1: Fraction) -> int:
        """Signed letter when a segment runs across a whole downward plateau."""
        if s0 == s1:
            return 0
        lo, hi = min(s0, s1), max(s0, s1)
        for span in self.down.spans:
            if span.start == lo and span.end == hi and self.down.edge_kind(span) == LOWER:
                if span.edge == RAMP:
                    return 0
                letter = self.down.transcript.edges[span.edge].letter
                return letter if s0 < s1 else -letter
        return 0

    def down_letters(self) -> list[tuple[Fraction, int]]:
        """Common time and signed letter of every downward plateau crossing."""
        out = []
        for r0, _, s0, s1, _, _ in self._segments():
            letter = self._crossed(s0, s1)
            if letter:
                out.append((r0, letter))
        return out

    def runs(self) -> list[Run]:
        out: list[Run] = []
        current: dict | None = None
        for r0, r1, s0, s1, t0, t1 in self._segments():
            up_edge = self.up.span_at((t0 + t1) / 2).edge
            down_edge = self.down.span_at((s0 + s1) / 2).edge
            if current is None or current["up_edge"] != up_edge:
                if current is not None:
                    out.append(_close(current))
                current = {"up_edge": up_edge, "start": r0, "end": r1, "letters": [], "down": [], "times": []}
            current["end"] = r1
            letter = self._crossed(s0, s1)
            if letter:
                current["letters"].append(letter)
                current["times"].append(r0)
            if not current["down"] or current["down"][-1] != down_edge:
                current["down"].append(down_edge)
        if current is not None:
            out.append(_close(current))
        return out


def _close(current: dict) -> Run:
    return Run(
        current["up_edge"],
        current["start"],
        current["end"],
        tuple(current["letters"]),
        tuple(current["down"]),
        tuple(current["times"]),
    )


def synchronize(
    down: WalkTranscript, up: WalkTranscript, frame: tuple[float, float] = (0.0, 1.0)
) -> SynchronizedPair:
    """Common time for two walks along the same loop.

    ``frame`` places the downward loop inside the upward one, which runs
    along delta^-1 . gamma . delta. The downward word read along the common
    time must reduce to the walk's own word.
    """
    alpha = attachment_map(down, frame)
    beta = attachment_map(up)
    phi_down, phi_up = fiber_component(alpha.map, beta.map)
    pair = SynchronizedPair(alpha, beta, phi_down, phi_up, frame)
    read: Word = reduce_word(letter for _, letter in pair.down_letters())
    if read != reduce_word(down.word):
        raise FiberProductError(
            "Synchronized downward word differs from the walk",
            details={"read": list(read), "walk": list(reduce_word(down.word))},
        )
    logger.debug(
        "Walks synchronized",
        grid=len(phi_down),
        down_edges=len(down.edges),
        up_edges=len(up.edges),
    )
    return pair
