"""Tests for relator bookkeeping, relation patches, the quotient presentation and the oracle verdict."""

from fractions import Fraction

import numpy as np
import pytest

from morsepi.geometry.abelian import AbelianInvariants
from morsepi.geometry.oracle import FREE_ABELIAN_2, FREE_CYCLIC, GENERIC, TRIVIAL, OraclePresentation
from morsepi.moduli.dagger import DaggerSample
from morsepi.relations.harvest import candidate_words
from morsepi.relations.oracle_compare import (
    INJECTIVE,
    SURJECTIVE,
    WELL_DEFINED,
    compare_with_oracle,
    oracle_image,
)
from morsepi.relations.patches import LEFT, RIGHT, RelationPatch, StepExtension, line_relator
from morsepi.relations.presentation import TYPE1, TYPE2, Relator, build_quotient, tietze

CIRCLE_ORACLE = OraclePresentation(
    generators=("e1-2",), relators=(), kind=FREE_CYCLIC, abelian=AbelianInvariants(rank=1)
)
SPHERE_ORACLE = OraclePresentation(
    generators=("e1-2", "e1-3"), relators=((1,), (2,)), kind=TRIVIAL, abelian=AbelianInvariants(rank=0)
)


def relators(*words, kind=TYPE2):
    return [Relator(tuple(w), kind, f"test{k}") for k, w in enumerate(words)]


def test_tietze_eliminates_identified_generators():
    """Test that g1 g2^-1 replaces g2 by g1."""
    images, rels = tietze(2, [(1, -2)])

    assert images == {1: (1,), 2: (1,)}
    assert rels == []


def test_tietze_kills_generators_and_substitutes():
    """Test that a length one relator kills its generator everywhere."""
    images, rels = tietze(3, [(2,), (1, 2, 3, 2)])

    assert images[2] == ()
    assert images[3] == (-1,)
    assert rels == []


def test_tietze_inverse_identification():
    """Test that g1 g2 = 1 makes g2 the inverse of g1."""
    images, _ = tietze(2, [(1, 2)])
    assert images[2] == (-1,)


def test_tietze_dedups_up_to_rotation_and_inversion():
    """Test that conjugate relators collapse to one."""
    _, rels = tietze(2, [(1, 2, -1, -2), (2, -1, -2, 1), (2, 1, -2, -1), (1, -1)])
    assert len(rels) == 1


def test_quotient_of_two_identified_generators():
    """Test the quotient of two steps identified by a type 2 relator."""
    presentation = build_quotient(["c1#0", "c1#1"], relators((1, -2)))

    assert presentation.rank == 1
    assert presentation.kind == FREE_CYCLIC
    assert presentation.group == "Z"
    assert presentation.abelian == AbelianInvariants(rank=1)
    assert presentation.image((2,)) == (1,)
    assert presentation.is_trivial((1, -2)) is True
    assert presentation.is_trivial((1,)) is False


def test_quotient_without_relators_is_free():
    """Test that two unrelated generators give a generic group with abelianization Z^2."""
    presentation = build_quotient(["a", "b"], [])

    assert presentation.kind == GENERIC
    assert presentation.abelian == AbelianInvariants(rank=2)
    assert presentation.group.startswith("generic")
    assert presentation.is_trivial((1, 2, -1, -2)) is None


def test_quotient_torus():
    """Test the commutator presentation of Z^2."""
    presentation = build_quotient(["a", "b"], relators((1, 2, -1, -2)))

    assert presentation.kind == FREE_ABELIAN_2
    assert presentation.group == "Z^2"
    assert presentation.is_trivial((2, 1, -2, -1)) is True


def test_trivial_relators_kept_for_provenance():
    """Test that trivial type 1 relators are listed but do not change the group."""
    rels = relators((), (1, -1), kind=TYPE1)
    presentation = build_quotient(["a"], rels)

    assert all(r.is_trivial for r in rels)
    assert presentation.kind == FREE_CYCLIC
    assert len(presentation.relators) == 2
    lines = presentation.lines()
    assert lines[0] == "gens: g1"
    assert lines[1] == "rels: (none)"
    assert "group: Z" in lines
    assert "g1 = a" in lines
    assert lines[-1] == "r2: type1(test1) g1 g1^-1"


def test_relators_csv():
    """Test the relator CSV dump."""
    rels = [Relator((1, -2), TYPE2, "line0#1", steps=(3, 4, -5))]
    text = build_quotient(["a", "b"], rels).relators_csv()

    assert text.splitlines() == ["index,kind,source,word,steps", "1,type2,line0#1,1 -2,3 4 -5"]


def test_candidate_words():
    """Test the enumerated candidate words, one per conjugacy and inversion class."""
    assert candidate_words(1, 4) == [(1,), (1, 1), (1, 1, 1), (1, 1, 1, 1)]
    words = candidate_words(2, 2)
    assert len(words) == 6
    assert (1, -2) in words and (1, 2) in words
    assert all(len(w) <= 2 for w in words)


def test_oracle_image():
    """Test evaluation of generator words through the image table."""
    images = {1: (1,), 2: (1, 2)}
    assert oracle_image((2, -1), images) == (1, 2, -1)
    assert oracle_image((1, -1), images) == ()


def test_compare_passes_for_the_circle():
    """Test a passing verdict: Z against the circle's edge-path group."""
    presentation = build_quotient(["a", "b"], relators((1, -2)))
    verdict = compare_with_oracle(presentation, CIRCLE_ORACLE, {1: (1,), 2: (1,)})

    assert verdict.passed
    assert verdict.failing is None
    assert not verdict.partial
    assert verdict.checks == {WELL_DEFINED: True, SURJECTIVE: True, INJECTIVE: True}
    assert verdict.lines()[0] == "verdict: PASS"


def test_compare_fails_injectivity_without_type2_relators():
    """Test the negative control: two generators without their identifying relator."""
    presentation = build_quotient(["a", "b"], [])
    verdict = compare_with_oracle(presentation, CIRCLE_ORACLE, {1: (1,), 2: (1,)})

    assert not verdict.passed
    assert verdict.failing == INJECTIVE
    assert "Z + Z vs Z" in verdict.details["abelianization"]


def test_compare_fails_well_definedness():
    """Test that a relator with nontrivial oracle image fails the first check."""
    presentation = build_quotient(["a", "b"], relators((1,)))
    verdict = compare_with_oracle(presentation, CIRCLE_ORACLE, {1: (1,), 2: (1,)})

    assert verdict.failing == WELL_DEFINED
    assert verdict.details["nontrivial relators"] == "g1"


def test_compare_fails_surjectivity():
    """Test that an oracle generator missed by every image fails surjectivity."""
    presentation = build_quotient(["a"], [])
    verdict = compare_with_oracle(presentation, CIRCLE_ORACLE, {1: ()})

    assert verdict.checks[SURJECTIVE] is False
    assert verdict.failing == SURJECTIVE
    assert verdict.details["missed generators"] == "e1-2"


def test_compare_walked_words_count_for_surjectivity():
    """Test that words read off walked oracle loops count as hits."""
    presentation = build_quotient(["a"], relators((1,)))
    verdict = compare_with_oracle(presentation, CIRCLE_ORACLE, {1: ()}, walks=[(1,)])

    assert verdict.checks[SURJECTIVE] is True


def test_compare_trivial_group():
    """Test the sphere: everything is trivial."""
    presentation = build_quotient(["a"], relators((1,)))
    verdict = compare_with_oracle(presentation, SPHERE_ORACLE, {1: (1, 2)})

    assert verdict.passed
    assert verdict.group == "1"


def test_compare_generic_oracle_is_partial():
    """Test that an unrecognized oracle group yields a flagged partial verdict."""
    oracle = OraclePresentation(
        generators=("a", "b"), relators=(), kind=GENERIC, abelian=AbelianInvariants(rank=2)
    )
    presentation = build_quotient(["x", "y"], [])
    verdict = compare_with_oracle(presentation, oracle, {1: (1,), 2: (2,)})

    assert verdict.passed
    assert verdict.partial
    assert verdict.checks[INJECTIVE] is None
    assert "PASS (partial)" in verdict.lines()[0]


@pytest.mark.parametrize("kind", [TYPE1, TYPE2])
def test_relator_triviality(kind):
    """Test the triviality flag of relators of both types."""
    assert Relator((1, -1), kind, "x").is_trivial
    assert not Relator((1,), kind, "x").is_trivial


def test_compare_torus_is_decided_exactly():
    """Test that a commutator presentation against the torus oracle is a full verdict."""
    oracle = OraclePresentation(
        generators=("a", "b", "c"),
        relators=((1, 2, -1, -2), (3, -1)),
        kind=FREE_ABELIAN_2,
        abelian=AbelianInvariants(rank=2),
    )
    presentation = build_quotient(["x", "y"], relators((1, 2, -1, -2)))
    verdict = compare_with_oracle(presentation, oracle, {1: (1,), 2: (2,)})

    assert presentation.kind == FREE_ABELIAN_2
    assert verdict.passed
    assert not verdict.partial
    assert verdict.group == "Z^2"
    assert verdict.checks == {WELL_DEFINED: True, SURJECTIVE: True, INJECTIVE: True}


def bounce(gap: float) -> DaggerSample:
    return DaggerSample("c1>c0#0", "c0#0", 0.25, 0.25, np.zeros(1), gap)


def extension(side: str, letters, gaps=(0.0,)) -> StepExtension:
    return StepExtension(
        root="c1",
        side=side,
        times=(Fraction(0), Fraction(1, 2), Fraction(1)),
        letters=tuple(letters),
        breaks=("c1|c0#0",),
        upper_arc="c1|c0#0",
        samples=tuple(bounce(g) for g in gaps),
    )


def test_relation_patch_bottom_and_conjugated_relator():
    """Test that a patch compares its two sides and conjugates the bottom to the base."""
    patch = RelationPatch(0, "c1", (extension(LEFT, [2]), extension(RIGHT, [3])), conjugator=(1,))

    assert patch.bottom == (2, -3)
    assert patch.relator == (1, 2, -3, -1)
    assert line_relator([patch]) == (1, 2, -3, -1)


def test_step_extension_carries_bouncing_pairs():
    """Test the gap of a patch and the letters carried into an extension."""
    left = extension(LEFT, [2], gaps=(1e-4, 3e-3))
    right = extension(RIGHT, [2], gaps=(2e-3,))
    patch = RelationPatch(1, "c1", (left, right), conjugator=())

    assert left.gap == pytest.approx(3e-3)
    assert patch.gap == pytest.approx(3e-3)
    assert patch.bottom == ()
    assert "bounces 2+1 gap 3.000e-03" in patch.describe()

    carried = left.extended(before=[1], after=[-4])
    assert carried.letters == (1, 2, -4)
    assert carried.samples == left.samples
    assert StepExtension("", LEFT, (Fraction(0),), (), (), "").gap == 0.0


def test_line_relator_multiplies_last_patch_first():
    """Test the order in which patch relators compose along a line."""
    first = RelationPatch(0, "c1", (extension(LEFT, [2]), extension(RIGHT, [])), conjugator=())
    second = RelationPatch(1, "c1", (extension(LEFT, [3]), extension(RIGHT, [])), conjugator=(2,))

    assert line_relator([first, second]) == (2, 3, -2, 2)
