"""Tests for builtin maps and walk attachment maps."""

from fractions import Fraction

import numpy as np
import pytest

from morsepi.crocodile.functorial import BUILTIN_MAPS, Bump, builtin_map
from morsepi.crocodile.sync import RAMP, attachment_map
from morsepi.crocodile.walk import DOWNWARD, LOWER, UPPER, Edge, WalkTranscript
from morsepi.exceptions import ValidationError
from morsepi.geometry.manifold import build_builtin


@pytest.fixture
def circle():
    return build_builtin("circle")


@pytest.fixture
def torus():
    return build_builtin("torus")


def transcript() -> WalkTranscript:
    """Lower step at tau 0, an upper step across the loop, lower step back at tau 1."""
    return WalkTranscript(
        direction=DOWNWARD,
        base="star",
        loop=np.zeros((2, 1)),
        corners=(),
        edges=(
            Edge(LOWER, "star#0", (0.0, 0.0), letter=1),
            Edge(UPPER, "c1#0", (0.0, 0.5, 1.0), alpha="A"),
            Edge(LOWER, "star#0", (1.0, 1.0), letter=-1),
        ),
    )


def test_builtin_maps_on_circle(circle):
    """Test identity, rotation, double cover and constant maps."""
    p = np.array([0.4])

    assert circle.distance(builtin_map("identity", circle)(p), p) < 1e-12
    rotated = builtin_map("rotation", circle, shift=np.array([0.5]))(p)
    assert circle.distance(rotated, np.array([0.9])) < 1e-12
    doubled = builtin_map("double-cover", circle)(p)
    assert circle.distance(doubled, np.array([0.8])) < 1e-12
    constant = builtin_map("constant", circle, base_image=np.array([1.2]))
    assert circle.distance(constant(np.array([-2.0])), np.array([1.2])) < 1e-12


def test_projection_drops_trailing_angles(torus, circle):
    """Test the projection from the torus onto its first circle."""
    phi = builtin_map("projection", torus, circle)

    assert circle.distance(phi(np.array([0.3, 2.0])), np.array([0.3])) < 1e-12
    assert phi.path(np.array([[0.1, 0.0], [0.2, 1.0]])).shape == (2, 1)


@pytest.mark.parametrize("name", ["rotation", "projection", "warp"])
def test_invalid_maps(circle, name):
    """Test that ill-posed maps raise ValidationError."""
    with pytest.raises(ValidationError):
        builtin_map(name, circle)


def test_double_cover_needs_circle(torus):
    """Test that the double cover is refused off the circle."""
    assert "double-cover" in BUILTIN_MAPS
    with pytest.raises(ValidationError):
        builtin_map("double-cover", torus)


def test_bump_perturbation_is_local(circle):
    """Test that a bump moves points near its center only."""
    phi = builtin_map(
        "identity", circle, perturbation=Bump(center=np.array([0.0]), radius=0.5, vector=np.array([0.1]))
    )

    assert circle.distance(phi(np.array([2.0])), np.array([2.0])) < 1e-12
    assert circle.distance(phi(np.array([0.0])), np.array([0.0])) > 0.05


def test_attachment_map_plateaus():
    """Test exact plateaus over lower steps and the span lookup on shared ends."""
    attachment = attachment_map(transcript())

    assert attachment.map(0) == 0
    assert attachment.map(1) == 1
    assert attachment.map(Fraction(1, 2)) == Fraction(1, 2)
    assert [span.edge for span in attachment.spans] == [0, 1, 2]
    first, middle, last = attachment.spans
    assert attachment.map(first.start) == attachment.map(first.end) == 0
    assert attachment.map(last.start) == attachment.map(last.end) == 1

    shared = first.end
    assert attachment.span_at(shared, prefer=UPPER).edge == 1
    assert attachment.span_at(shared, prefer=LOWER).edge == 0
    assert attachment.edge_kind(middle) == UPPER


def test_framed_attachment_map_adds_ramps():
    """Test that a framed walk is extended by ramps at both ends."""
    attachment = attachment_map(transcript(), frame=(0.25, 0.75))

    assert [span.edge for span in attachment.spans] == [RAMP, 0, 1, 2, RAMP]
    assert attachment.edge_kind(attachment.spans[0]) == LOWER
    assert attachment.map(0) == 0
    assert attachment.map(1) == 1
    plateau = attachment.spans[1]
    assert attachment.map(plateau.start) == attachment.map(plateau.end) == Fraction(1, 4)
