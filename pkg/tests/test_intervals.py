"""Tests for exact interval maps and their fiber product component."""

import random
from fractions import Fraction

import pytest

from morsepi.crocodile.intervals import IntervalMap, fiber_component, fiber_graph
from morsepi.exceptions import FiberProductError, ValidationError

FOLD = IntervalMap.uniform([0, "0.6", "0.3", 1])


def random_map(rng: random.Random) -> IntervalMap:
    interior = [Fraction(rng.randint(1, 999_999), 1_000_000) for _ in range(rng.randint(1, 4))]
    return IntervalMap.uniform([0, *interior, 1])


def assert_commutes(alpha: IntervalMap, beta: IntervalMap, phi_alpha: IntervalMap, phi_beta: IntervalMap, rng):
    assert phi_alpha(0) == 0 and phi_beta(0) == 0
    assert phi_alpha(1) == 1 and phi_beta(1) == 1
    walks = list(phi_alpha.domain) + [Fraction(rng.randint(0, 1000), 1000) for _ in range(20)]
    for r in walks:
        assert alpha(phi_alpha(r)) == beta(phi_beta(r))


def test_interval_map_evaluation():
    """Test exact evaluation between and at breakpoints."""
    assert FOLD(0) == 0
    assert FOLD(Fraction(1, 3)) == Fraction(3, 5)
    assert FOLD(Fraction(1, 2)) == Fraction(9, 20)
    assert FOLD(1) == 1
    with pytest.raises(ValidationError):
        FOLD(Fraction(3, 2))


@pytest.mark.parametrize(
    ("domain", "values"),
    [
        ((0,), (0,)),
        ((0, 1), (0, 1, 1)),
        ((0, "0.5"), (0, 1)),
        ((0, "0.5", "0.5", 1), (0, 0, 1, 1)),
        ((0, 1), (0, 2)),
    ],
)
def test_invalid_interval_maps(domain, values):
    """Test that malformed maps raise ValidationError."""
    with pytest.raises(ValidationError):
        IntervalMap(domain, values)


def test_critical_values_and_signs():
    """Test turning points and plateaus."""
    assert FOLD.signs == (1, -1, 1)
    assert FOLD.critical_values() == {Fraction(3, 5), Fraction(3, 10)}

    plateau = IntervalMap.uniform([0, "0.4", "0.4", 1])
    assert plateau.signs == (1, 0, 1)
    assert plateau.critical_values() == {Fraction(2, 5)}
    assert IntervalMap.identity().critical_values() == set()


def test_compression_keeps_turning_points():
    """Test that compression drops breakpoints inside monotone runs only."""
    alpha = IntervalMap.uniform([0, "0.2", "0.5", "0.3", 1])
    compressed = alpha.compressed()

    assert compressed.values == (0, Fraction(1, 2), Fraction(3, 10), 1)
    assert alpha.kept_indices(keep=[1]) == [0, 1, 2, 3, 4]
    for s in compressed.domain:
        assert compressed(s) == alpha(s)


def test_fold_against_identity():
    """Test the component of the identity against a fold: it crosses the fold."""
    phi_alpha, phi_beta = fiber_component(IntervalMap.identity(), FOLD)

    assert_commutes(IntervalMap.identity(), FOLD, phi_alpha, phi_beta, random.Random(1))
    assert all(b >= a for a, b in zip(phi_beta.values, phi_beta.values[1:]))
    assert phi_alpha.signs == (1, -1, 1)
    assert set(phi_alpha.values) >= {Fraction(3, 5), Fraction(3, 10)}


def test_fold_against_fold_with_other_values():
    """Test two folds with distinct critical values."""
    other = IntervalMap.uniform([0, "0.8", "0.1", 1])
    rng = random.Random(2)
    phi_alpha, phi_beta = fiber_component(FOLD, other)

    assert_commutes(FOLD, other, phi_alpha, phi_beta, rng)


def test_shared_critical_value_rejected():
    """Test that maps sharing a critical value raise FiberProductError."""
    with pytest.raises(FiberProductError):
        fiber_component(FOLD, FOLD)

    with pytest.raises(FiberProductError):
        fiber_component(FOLD, IntervalMap.uniform([0, "0.9", "0.6", 1]))


def test_endpoints_must_be_fixed():
    """Test that maps not sending 0 to 0 and 1 to 1 are rejected."""
    with pytest.raises(FiberProductError):
        fiber_component(IntervalMap.uniform(["0.1", 1]), IntervalMap.identity())


def test_fiber_graph_of_identity_is_diagonal():
    """Test the fiber graph of two identities."""
    graph = fiber_graph(IntervalMap.identity(), IntervalMap.identity())
    assert set(graph.nodes) == {(0, 0), (1, 1)}


def test_random_fiber_products():
    """Test commutation on random exact maps; shared critical values must be refused."""
    rng = random.Random(20241018)
    traced = 0
    for _ in range(200):
        alpha, beta = random_map(rng), random_map(rng)
        if alpha.critical_values() & beta.critical_values():
            with pytest.raises(FiberProductError):
                fiber_component(alpha, beta)
            continue
        phi_alpha, phi_beta = fiber_component(alpha, beta)
        assert_commutes(alpha, beta, phi_alpha, phi_beta, rng)
        traced += 1
    assert traced >= 190
