"""Checking the harvested presentation against the triangulation's edge-path group."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from morsepi.exceptions import GeometryError
from morsepi.geometry.oracle import GENERIC, OraclePresentation
from morsepi.geometry.words import Word, concat_words, format_word, reduce_word
from morsepi.observability.logging import get_logger
from morsepi.relations.presentation import Presentation

logger = get_logger(__name__)

WELL_DEFINED = "well-defined"
SURJECTIVE = "surjective"
INJECTIVE = "injective"

CHECK_ORDER = (WELL_DEFINED, SURJECTIVE, INJECTIVE)


@dataclass(frozen=True)
class Verdict:
    """Outcome of the comparison; ``failing`` names the first failed check."""

    passed: bool
    checks: dict[str, bool | None]
    failing: str | None
    partial: bool
    group: str
    details: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        status = "PASS" if self.passed else "FAIL"
        if self.partial:
            status += " (partial)"
        out = [f"verdict: {status}", f"group: {self.group}"]
        for name in CHECK_ORDER:
            value = self.checks.get(name)
            out.append(f"{name}: {'undecided' if value is None else 'yes' if value else 'no'}")
        if self.failing:
            out.append(f"failing: {self.failing}")
        for key, value in sorted(self.details.items()):
            out.append(f"{key}: {value}")
        return out


def oracle_image(word: Sequence[int], images: Mapping[int, Word]) -> Word:
    """Image of a generator word under the generator evaluation table."""
    pieces = []
    for letter in word:
        image = images[abs(letter)]
        pieces.append(image if letter > 0 else tuple(-x for x in reversed(image)))
    return reduce_word(concat_words(*pieces))


def _trivial(oracle: OraclePresentation, word: Sequence[int]) -> bool | None:
    if not reduce_word(word):
        return True
    try:
        return oracle.is_trivial(word)
    except GeometryError:
        return None


def compare_with_oracle(
    presentation: Presentation,
    oracle: OraclePresentation,
    images: Mapping[int, Word],
    walks: Sequence[Word] = (),
) -> Verdict:
    """Check the map from L/R to the oracle group.

    ``images`` sends each step generator to its oracle word; ``walks``
    are further oracle words known to lie in the image (walked oracle
    loops). Well-definedness asks every relator to evaluate trivially,
    surjectivity every oracle generator to be reached, injectivity equal
    abelianizations and, for recognized kinds, equal groups.
    """
    relator_results = [_trivial(oracle, oracle_image(r.word, images)) for r in presentation.relators]
    failing_relators = [k + 1 for k, t in enumerate(relator_results) if t is False]
    well_defined: bool | None = False if failing_relators else (None if None in relator_results else True)

    reached = [reduce_word(w) for w in (*images.values(), *walks)]
    missed = []
    undecided_surjective = False
    for k in range(1, len(oracle.generators) + 1):
        hit = _trivial(oracle, (k,))
        if hit is not True:
            results = [_trivial(oracle, concat_words(w, (-k,))) for w in reached]
            hit = True if True in results else (None if None in results or hit is None else False)
        if hit is False:
            missed.append(oracle.generators[k - 1])
        elif hit is None:
            undecided_surjective = True
    surjective: bool | None = False if missed else (None if undecided_surjective else True)

    same_abelian = presentation.abelian == oracle.abelian
    if oracle.kind == GENERIC or presentation.kind == GENERIC:
        injective: bool | None = False if not same_abelian else None
    else:
        injective = same_abelian and presentation.kind == oracle.kind

    checks = {WELL_DEFINED: well_defined, SURJECTIVE: surjective, INJECTIVE: injective}
    failing = next((name for name in CHECK_ORDER if checks[name] is False), None)
    partial = failing is None and any(v is None for v in checks.values())
    details = {
        "abelianization": f"{presentation.abelian} vs {oracle.abelian}",
        "oracle kind": oracle.kind,
    }
    if failing_relators:
        details["nontrivial relators"] = ", ".join(
            format_word(presentation.relators[k - 1].word) for k in failing_relators
        )
    if missed:
        details["missed generators"] = ", ".join(missed)
    verdict = Verdict(failing is None, checks, failing, partial, presentation.group, details)
    logger.info(
        "Oracle comparison finished",
        passed=verdict.passed,
        failing=failing,
        partial=partial,
        group=verdict.group,
    )
    return verdict
