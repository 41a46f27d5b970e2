"""Tests for Morse steps, step tables and multiplicities."""

from dataclasses import replace

import numpy as np
import pytest

from morsepi.exceptions import DimensionError, InconsistentComponentError, ValidationError
from morsepi.flowfield.integrator import NEAR_CRITICAL, Endpoint, FlowArc
from morsepi.geometry.oracle import FREE_CYCLIC, GENERIC, TRIVIAL
from morsepi.geometry.words import reduce_word
from morsepi.moduli.dimensions import (
    BROKEN_AT_INDEX_0,
    ZERO_LENGTH_STRATUM,
    boundary_violations,
    expected_dimension,
    legal_boundary,
)
from morsepi.moduli.multiplicity import multiplicities
from morsepi.moduli.types import AUGMENTATION, CONNECTING, STAR, STAR_POINT, BrokenConfiguration, ZeroLength
from morsepi.steps.model import MorseLoop, consecutive, reduce
from morsepi.steps.operations import build_table, close_free_loop, make_steps

from tests.conftest import broken, component


@pytest.fixture
def table(circle_components):
    star = circle_components["star"][0]
    return build_table([*circle_components["c1"], star], "star")


def test_make_steps_skips_closed_components(circle_components):
    """Test that closed components carry no step and the rest come in both orientations."""
    steps = make_steps(circle_components["c1"])

    assert len(steps) == 4
    assert [s.letter for s in steps] == [1, -1, 2, -2]
    assert steps[1].start == steps[0].end


def test_make_steps_rejects_single_endpoint():
    """Test that a component with one classified endpoint aborts."""
    lonely = replace(component("c1#9", broken("A"), broken("B")), boundary=(broken("A"),))

    with pytest.raises(InconsistentComponentError):
        make_steps([lonely])


def test_distinguished_step_comes_first(table):
    """Test that the distinguished component gets step 1 and leaves the zero-length vertex."""
    assert table.steps[1].component.distinguished
    assert table.distinguished == 1
    assert table.steps[1].through == "star"


def test_spanning_tree_and_generators(table):
    """Test the generators of the circle step graph."""
    assert len(table) == 3
    assert table.tree == {1, 2}
    assert table.generators == (3,)
    assert table.generator_labels() == ["c1#1"]


def test_fundamental_loop_is_based_and_consecutive(table):
    """Test that the fundamental loop of a generator is a based loop of consecutive steps."""
    loop = table.fundamental_loop(3)

    assert loop.word == (1, 2, 3, -1)
    table.check_consecutive(loop.word)
    assert table.to_generators(loop.word) == (1,)


def test_generator_round_trip(table):
    """Test that from_generators and to_generators are inverse on generator words."""
    for word in [(1,), (-1,), (1, 1), (1, -1, 1)]:
        loop = table.from_generators(word)
        table.check_consecutive(loop.word)
        assert table.to_generators(loop.word) == reduce_word(word)


def test_inconsecutive_word_rejected(table):
    """Test that a word whose steps do not join raises ValidationError."""
    with pytest.raises(ValidationError):
        table.check_consecutive((1, 3))

    with pytest.raises(ValidationError):
        table.check_consecutive((1, 2))


def test_close_free_loop(table):
    """Test that a free loop conjugated by a path from the base is a based loop."""
    loop = close_free_loop(table, (1,), (2, 3))

    assert loop.word == (1, 2, 3, -1)
    assert close_free_loop(table, (1,), ()).word == ()

    with pytest.raises(ValidationError):
        close_free_loop(table, (1,), (2,))
    with pytest.raises(ValidationError):
        close_free_loop(table, (), (2, 3))


def test_step_lookup_by_boundary(table):
    """Test letters found from component ids and boundary keys."""
    start_key = broken("A").key
    assert table.letter_for("c1#0", start_key) == 2
    assert table.letter_for("c1#1", start_key) == -3
    assert sorted(table.starting_at(start_key, through="c1")) == [-3, 2]
    with pytest.raises(KeyError):
        table.letter_for("missing", start_key)


def test_reversed_step_label(table):
    """Test that the reverse of a step swaps its endpoints."""
    step = table.step(-2)
    assert step.label == "-c1#0(c1)"
    assert step.start == table.step(2).end
    assert table.format((1, 2)) == "+star#0(star)\n+c1#0(c1)"


def test_morse_loop_algebra():
    """Test reduction, inversion and concatenation of Morse loops."""
    loop = MorseLoop((1, 2, -2, 3))

    assert loop.reduced().word == (1, 3)
    assert loop.inverse().word == (-3, 2, -2, -1)
    assert loop.then(loop.inverse()).is_empty
    assert MorseLoop(()).is_empty
    assert len(loop) == 4


def test_self_loop_step_is_a_generator(circle_components):
    """Test that a step from an alpha back to itself is always a generator."""
    table = build_table([*circle_components["star"], *circle_components["c1"]], "star")

    assert table.generators == (2, 4)
    assert table.fundamental_loop(2).word == (1, 3, 2, -3, -1)
    assert table.to_generators(table.fundamental_loop(4).word) == (2,)


def test_multiplicities_count_boundary_bearing_components(circle_components):
    """Test that closed and distinguished components are not counted."""
    result = multiplicities({"c1": circle_components["c1"]}, circle_components["star"], FREE_CYCLIC)

    assert result.per_point == {"c1": 2}
    assert result.star == 1
    assert result.total == 3
    assert result.oracle_min_generators == 1
    assert result.holds is True
    assert "bound holds: True" in result.lines()[-1]


def test_multiplicity_bound_on_trivial_and_generic_groups(circle_components):
    """Test the bound against the trivial group and an unrecognized group."""
    trivial = multiplicities({}, [], TRIVIAL)
    assert trivial.holds is True

    generic = multiplicities({"c1": circle_components["c1"]}, [], GENERIC)
    assert generic.oracle_min_generators is None
    assert generic.holds is None


@pytest.mark.parametrize(
    ("kind", "n", "source", "target", "expected"),
    [
        (CONNECTING, 1, 1, 0, 0),
        (CONNECTING, 2, 2, 1, 0),
        (AUGMENTATION, 1, 1, None, 1),
        (AUGMENTATION, 2, 0, None, 0),
        (STAR_POINT, 1, None, 0, 0),
        (STAR, 2, None, None, 1),
    ],
)
def test_expected_dimension(kind, n, source, target, expected):
    """Test expected dimensions of the traced and rigid spaces."""
    assert expected_dimension(kind, n, source, target) == expected


def test_unknown_space_kind():
    """Test that unknown space kinds raise DimensionError."""
    with pytest.raises(DimensionError):
        expected_dimension("bogus", 1)
    with pytest.raises(DimensionError):
        legal_boundary(CONNECTING)


def test_boundary_violations(circle_components):
    """Test the boundary formulas of augmentation and star components."""
    index_of = {"c0": 0, "c1": 1}
    star = circle_components["star"][0]
    down = circle_components["c1"][0]

    assert legal_boundary(STAR) == {BROKEN_AT_INDEX_0, ZERO_LENGTH_STRATUM}
    assert boundary_violations(star, index_of) == []
    assert boundary_violations(down, index_of) == []

    bad = component("c1#7", star.boundary[0], broken("A"))
    problems = boundary_violations(bad, index_of)
    assert any("illegal stratum" in p for p in problems)


def rooted(alpha: str, offset: float) -> BrokenConfiguration:
    """A broken end whose alpha leg runs along the line at ``offset``."""
    leg = FlowArc(
        times=np.linspace(0.0, 1.0, 5),
        points=np.column_stack([np.linspace(0.0, 1.0, 5), np.full(5, offset)]),
        start=Endpoint(NEAR_CRITICAL, "c1"),
        end=Endpoint(NEAR_CRITICAL, "c0"),
    )
    return BrokenConfiguration(
        beta="beta", alpha=alpha, legs=(leg,), junctions=("c0",), terminal="c0", ev=np.zeros(1)
    )


def test_consecutive_compares_alphas():
    """Test junctions by alpha identity, then by Hausdorff distance of the alpha legs."""
    zero = ZeroLength("star", np.zeros(1))

    assert consecutive(broken("A"), broken("A", beta="other"))
    assert not consecutive(broken("A"), broken("B"))
    assert consecutive(rooted("A", 0.0), rooted("A2", 1e-6))
    assert not consecutive(rooted("A", 0.0), rooted("A2", 1e-2))
    assert consecutive(rooted("A", 0.0), rooted("A2", 1e-2), tolerance=0.1)
    assert consecutive(zero, ZeroLength("star", np.ones(1)))
    assert not consecutive(zero, ZeroLength("aux", np.zeros(1)))
    assert not consecutive(zero, broken("A"))


def test_consecutive_rejects_unclassified_ends():
    """Test that a junction needs classified endpoints."""
    with pytest.raises(ValidationError):
        consecutive(broken("A"), object())


@pytest.mark.parametrize(
    ("word", "expected"),
    [
        ((), ()),
        ((1, -1), ()),
        ((1, 2, -2, 3), (1, 3)),
        ((2, 1, -1, -2, 2), (2,)),
        ((1, -2), (1, -2)),
    ],
)
def test_reduce_cancels_inverse_pairs(word, expected):
    """Test the sigma sigma-bar reduction."""
    assert reduce(word) == expected
