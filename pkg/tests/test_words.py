"""Tests for free group words and abelianization."""

import pytest

from morsepi.geometry.abelian import AbelianInvariants, abelianize
from morsepi.geometry.words import (
    concat_words,
    cyclic_normal_form,
    cyclic_reduce,
    exponent_vector,
    format_word,
    invert_word,
    reduce_word,
)


def test_reduce_word_cancels_inverse_pairs():
    """Test free reduction."""
    assert reduce_word([1, 2, -2, -1, 3]) == (3,)
    assert reduce_word([1, -1]) == ()
    assert reduce_word([]) == ()
    assert reduce_word([2, 1, -1, 1]) == (2, 1)


def test_reduce_word_rejects_zero():
    """Test that 0 is not a letter."""
    with pytest.raises(ValueError):
        reduce_word([1, 0])


def test_invert_and_concat():
    """Test that a word times its inverse is the empty word."""
    word = (1, -2, 3)
    assert invert_word(word) == (-3, 2, -1)
    assert concat_words(word, invert_word(word)) == ()
    assert concat_words((1, 2), (-2, 3)) == (1, 3)


def test_cyclic_reduce():
    """Test cyclic reduction strips conjugating letters."""
    assert cyclic_reduce((2, 1, 3, -2)) == (1, 3)
    assert cyclic_reduce((1, -1)) == ()
    assert cyclic_reduce((-1, 1, 1, 1)) == (1, 1)


def test_cyclic_normal_form_identifies_conjugates_and_inverses():
    """Test that rotations, inverses and conjugates share a normal form."""
    commutator = (1, 2, -1, -2)
    variants = [
        commutator,
        (2, -1, -2, 1),
        invert_word(commutator),
        (3, *commutator, -3),
    ]
    forms = {cyclic_normal_form(w) for w in variants}
    assert len(forms) == 1
    assert cyclic_normal_form((1, -1)) == ()
    assert cyclic_normal_form((2,)) == cyclic_normal_form((-2,))


def test_exponent_vector():
    """Test exponent sums per generator."""
    assert exponent_vector((1, 2, -1, -2), 2) == [0, 0]
    assert exponent_vector((1, 1, -2), 3) == [2, -1, 0]
    with pytest.raises(ValueError):
        exponent_vector((3,), 2)


def test_format_word():
    """Test readable word formatting."""
    assert format_word(()) == "1"
    assert format_word((1, -2)) == "g1 g2^-1"
    assert format_word((-1,), labels=["a"]) == "a^-1"


@pytest.mark.parametrize(
    ("count", "relators", "expected"),
    [
        (0, [], AbelianInvariants(rank=0)),
        (1, [], AbelianInvariants(rank=1)),
        (2, [(1, 2, -1, -2)], AbelianInvariants(rank=2)),
        (2, [(1, -2)], AbelianInvariants(rank=1)),
        (1, [(1, 1)], AbelianInvariants(rank=0, torsion=(2,))),
        (2, [(1,), (2,)], AbelianInvariants(rank=0)),
        (3, [(1, 1, 1), (2, 2, 2, 2, 2, 2)], AbelianInvariants(rank=1, torsion=(3, 6))),
    ],
)
def test_abelianize(count, relators, expected):
    """Test Smith normal form invariants."""
    assert abelianize(count, relators) == expected


def test_abelian_invariants_str():
    """Test group names of abelian invariants."""
    assert str(AbelianInvariants(rank=0)) == "0"
    assert str(AbelianInvariants(rank=2)) == "Z + Z"
    assert str(AbelianInvariants(rank=1, torsion=(2,))) == "Z + Z/2"
