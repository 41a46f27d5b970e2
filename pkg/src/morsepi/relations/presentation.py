"""The presentation L/R: step generators, harvested relators, simplification."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from morsepi.geometry.abelian import AbelianInvariants, abelianize
from morsepi.geometry.oracle import FREE_ABELIAN_2, FREE_CYCLIC, GENERIC, TRIVIAL, in_relator_span, normal_form_kind
from morsepi.geometry.words import Word, cyclic_normal_form, cyclic_reduce, format_word, reduce_word
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

TYPE1 = "type1"
TYPE2 = "type2"

GROUP_NAMES = {TRIVIAL: "1", FREE_CYCLIC: "Z", FREE_ABELIAN_2: "Z^2"}


@dataclass(frozen=True)
class Relator:
    """A harvested relation, as a generator word and as the based step word it came from.

    ``source`` names the walked loop (type 1) or the patch line (type 2);
    ``conjugator`` is the step word carrying a patch bottom to the base.
    """

    word: Word
    kind: str
    source: str
    steps: Word = ()
    conjugator: Word = ()

    @property
    def is_trivial(self) -> bool:
        return not reduce_word(self.word)


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[Relator, ...]
    images: tuple[Word, ...]
    kept: tuple[int, ...]
    simplified: tuple[Word, ...]
    abelian: AbelianInvariants
    kind: str

    @property
    def rank(self) -> int:
        return len(self.kept)

    @property
    def group(self) -> str:
        return GROUP_NAMES.get(self.kind, f"generic, abelianization {self.abelian}")

    def image(self, word: Sequence[int]) -> Word:
        """A generator word rewritten in the surviving generators."""
        out: list[int] = []
        for letter in word:
            piece = self.images[abs(letter) - 1]
            out.extend(piece if letter > 0 else tuple(-x for x in reversed(piece)))
        return reduce_word(out)

    def is_trivial(self, word: Sequence[int]) -> bool | None:
        """Exact for the recognized kinds; None when a generic word does not reduce away."""
        image = self.image(word)
        if not image or self.kind == TRIVIAL:
            return True
        if self.kind == GENERIC:
            return None
        return in_relator_span(image, self.simplified, self.rank)

    def lines(self) -> list[str]:
        labels = [f"g{i + 1}" for i in range(len(self.generators))]
        kept = [labels[i - 1] for i in self.kept]
        out = [f"gens: {', '.join(labels) if labels else '(none)'}"]
        out.append(f"rels: {', '.join(format_word(r.word) for r in self.relators if not r.is_trivial) or '(none)'}")
        out.append(f"simplified gens: {', '.join(kept) if kept else '(none)'}")
        simplified = [format_word(r, kept) for r in self.simplified]
        out.append(f"simplified rels: {', '.join(simplified) if simplified else '(none)'}")
        out.append(f"abelianization: {self.abelian}")
        out.append(f"group: {self.group}")
        for label, step in zip(labels, self.generators):
            out.append(f"{label} = {step}")
        for k, r in enumerate(self.relators):
            conjugator = f" conjugated by {format_word(r.conjugator)}" if r.conjugator else ""
            out.append(f"r{k + 1}: {r.kind}({r.source}) {format_word(r.word)}{conjugator}")
        return out

    def relators_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["index", "kind", "source", "word", "steps"])
        for k, r in enumerate(self.relators):
            writer.writerow([k + 1, r.kind, r.source, " ".join(map(str, r.word)), " ".join(map(str, r.steps))])
        return buffer.getvalue()


def _substitute(word: Sequence[int], generator: int, value: Word) -> Word:
    out: list[int] = []
    for letter in word:
        if abs(letter) != generator:
            out.append(letter)
        else:
            out.extend(value if letter > 0 else tuple(-x for x in reversed(value)))
    return reduce_word(out)


def _dedup(relators: Sequence[Word]) -> list[Word]:
    seen: set[Word] = set()
    out = []
    for r in relators:
        key = cyclic_normal_form(r)
        if key and key not in seen:
            seen.add(key)
            out.append(cyclic_reduce(r))
    return out


def tietze(generator_count: int, relators: Sequence[Sequence[int]]) -> tuple[dict[int, Word], list[Word]]:
    """Eliminate generators defined by relators of length one or two.

    Returns the image of every generator in the surviving ones (original
    numbering) and the remaining relators, cyclically reduced and
    deduplicated up to rotation and inversion.
    """
    images: dict[int, Word] = {g: (g,) for g in range(1, generator_count + 1)}
    rels = _dedup([reduce_word(r) for r in relators])
    while True:
        pick = None
        for r in rels:
            if len(r) == 1:
                pick = (abs(r[0]), ())
                break
            if len(r) == 2 and abs(r[0]) != abs(r[1]):
                u, v = r
                if abs(v) > abs(u):
                    pick = (abs(v), (-u if v > 0 else u,))
                else:
                    pick = (abs(u), (-v if u > 0 else v,))
                break
        if pick is None:
            return images, rels
        generator, value = pick
        images = {g: _substitute(w, generator, value) for g, w in images.items()}
        rels = _dedup([_substitute(r, generator, value) for r in rels])


def build_quotient(generators: Sequence[str], relators: Sequence[Relator]) -> Presentation:
    """Simplified presentation with abelianization and recognized kind."""
    count = len(generators)
    images, rels = tietze(count, [r.word for r in relators])
    kept = tuple(sorted({abs(x) for w in images.values() for x in w}))
    renumber = {g: k + 1 for k, g in enumerate(kept)}

    def rename(word: Sequence[int]) -> Word:
        return tuple(renumber[abs(x)] * (1 if x > 0 else -1) for x in word)

    simplified = tuple(rename(r) for r in rels)
    presentation = Presentation(
        generators=tuple(generators),
        relators=tuple(relators),
        images=tuple(rename(images[g]) for g in range(1, count + 1)),
        kept=kept,
        simplified=simplified,
        abelian=abelianize(len(kept), simplified),
        kind=normal_form_kind(len(kept), simplified),
    )
    logger.info(
        "Presentation assembled",
        generators=count,
        relators=len(relators),
        simplified_generators=len(kept),
        simplified_relators=len(simplified),
        group=presentation.group,
    )
    return presentation
