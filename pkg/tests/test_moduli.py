"""Tests for shooting, component tracing and bouncing and hybrid fiber products."""

import numpy as np
import pytest

from morsepi.config import ShootingConfig
from morsepi.crocodile.functorial import builtin_map
from morsepi.exceptions import DimensionError
from morsepi.factory import create_data
from morsepi.flowfield.critical import find_critical_points
from morsepi.flowfield.integrator import (
    ESCAPE,
    NEAR_CRITICAL,
    SLICE_MINUS,
    BallPassage,
    Endpoint,
    FlowArc,
    FlowEngine,
)
from morsepi.flowfield.scenario import parse_scenario
from morsepi.geometry.manifold import build_builtin, wrap_angle
from morsepi.moduli.components import ComponentEnumerator
from morsepi.moduli.connecting import enumerate_connecting, enumerate_star_arcs, star_line
from morsepi.moduli.dagger import EvCurve, build_dagger, build_hybrid
from morsepi.moduli.shooting import AdaptiveShooter

from tests.conftest import CIRCLE_TEXT


def curve(id_: str, parameters, points) -> EvCurve:
    return EvCurve(id_, np.array(parameters, dtype=float), np.array(points, dtype=float))


@pytest.fixture
def circle():
    return build_builtin("circle")


def test_rigid_point_on_a_family(circle):
    """Test that a rigid ev- point is located on a one-parameter ev+ family."""
    left = curve("u", [0.0, 1.0], [[0.0], [1.0]])

    matched = build_dagger(circle, left, curve("v", [0.3], [[0.4]]))

    assert len(matched) == 1
    sample = matched[0]
    assert (sample.left_id, sample.right_id) == ("u", "v")
    assert sample.left_parameter == pytest.approx(0.4)
    assert sample.right_parameter == pytest.approx(0.3)
    assert sample.gap < 1e-9

    assert build_dagger(circle, left, curve("w", [0.0], [[1.5]])) == []


def test_rigid_pairs(circle):
    """Test that two rigid points pair only when they coincide."""
    assert len(build_dagger(circle, curve("u", [0.2], [[0.7]]), curve("v", [0.9], [[0.7]]))) == 1
    assert build_dagger(circle, curve("u", [0.2], [[0.7]]), curve("v", [0.9], [[0.8]])) == []
    assert build_dagger(circle, curve("u", [], np.empty((0, 1))), curve("v", [0.9], [[0.8]])) == []


def test_crossing_families_on_torus():
    """Test that two crossing families on a surface meet once."""
    torus = build_builtin("torus")
    left = curve("u", [0.0, 1.0], [[0.0, 0.5], [1.0, 0.5]])
    right = curve("v", [0.0, 1.0], [[0.5, 0.0], [0.5, 1.0]])

    matched = build_dagger(torus, left, right)

    assert len(matched) == 1
    assert matched[0].left_parameter == pytest.approx(0.5)
    assert matched[0].right_parameter == pytest.approx(0.5)
    assert torus.distance(matched[0].point, np.array([0.5, 0.5])) < 1e-9


def test_refine_can_drop_candidates(circle):
    """Test that a refine hook returning None removes the candidate."""
    left = curve("u", [0.0, 1.0], [[0.0], [1.0]])
    right = curve("v", [0.3], [[0.4]])

    assert build_dagger(circle, left, right, refine=lambda sample: None) == []


def test_higher_dimensional_families_are_refused(mocker):
    """Test that families over models of dimension three are not matched."""
    model = mocker.Mock(dim=3)
    left = curve("u", [0.0, 1.0], [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    right = curve("v", [0.0, 1.0], [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    with pytest.raises(DimensionError):
        build_dagger(model, left, right)


def test_hybrid_matches_through_the_map(circle):
    """Test that the hybrid product compares phi(ev+) with ev-."""
    left = curve("u", [0.0], [[0.0]])
    right = curve("v", [0.0], [[0.5]])
    rotation = builtin_map("rotation", circle, shift=np.array([0.5]))

    assert len(build_hybrid(left, right, rotation, circle)) == 1
    assert build_hybrid(left, right, builtin_map("identity", circle), circle) == []


@pytest.fixture(scope="module")
def circle_engine():
    data = create_data(parse_scenario(CIRCLE_TEXT))
    return FlowEngine(data, find_critical_points(data, 16, seed=7))


def line_fire(data):
    """Shots on a line that reach the ball of c0 only for small parameters."""

    def fire(p: float) -> FlowArc:
        points = np.array([data.state(np.array([0.0]), 0.0, p), data.state(np.array([1.0]), 0.0, 4.0 * np.sign(p))])
        passages = (BallPassage("c0", 1.0, 2.0, np.array([p])),) if abs(p) < 0.1 else ()
        return FlowArc(
            times=np.array([0.0, 1.0]),
            points=points,
            start=Endpoint(SLICE_MINUS),
            end=Endpoint(ESCAPE),
            passages=passages,
        )

    return fire


@pytest.mark.parametrize(("lo", "hi", "grid"), [(-1.0, 1.0, 5), (-1.0, 1.2, 4)])
def test_shooter_resolves_exact_and_bracketed_hits(circle_engine, lo, hi, grid):
    """Test that a shot exactly on the stable manifold is a transition like a bracketed sign change."""
    shooter = AdaptiveShooter(circle_engine.data, line_fire(circle_engine.data), ["c0"], ShootingConfig())

    shots = shooter.sweep(lo, hi, grid)
    transitions = shooter.transitions(shots)

    assert len(transitions) == 1
    root, slope = shooter.solve(*transitions[0])
    assert root == pytest.approx(0.0, abs=1e-9)
    assert slope == pytest.approx(100.0)


@pytest.mark.slow
def test_star_line_finds_the_exact_arc(circle_engine):
    """Test that the star line through a base point away from c0 converges to it once."""
    shooter, shots = star_line(circle_engine, 48)
    arcs = enumerate_star_arcs(circle_engine, shooter, shots)

    [arc] = arcs["c0"]
    assert arc.parameter == pytest.approx(0.0, abs=1e-9)
    assert arc.arc.end == Endpoint(NEAR_CRITICAL, "c0")
    assert arc.slope > 0.0


@pytest.mark.slow
def test_connecting_arcs_of_the_circle(circle_engine):
    """Test that the unstable circle of c1 reaches c0 along two opposite arcs."""
    c0, c1 = circle_engine.by_id["c0"], circle_engine.by_id["c1"]

    arcs = enumerate_connecting(circle_engine, c1, c0, grid=24)

    assert len(arcs) == 2
    assert abs(wrap_angle(arcs[1].parameter - arcs[0].parameter)) == pytest.approx(np.pi, abs=1e-6)
    assert all(a.arc.end == Endpoint(NEAR_CRITICAL, "c0") and a.slope > 0.0 for a in arcs)
    assert [a.id for a in arcs] == ["c1>c0#0", "c1>c0#1"]
    assert enumerate_connecting(circle_engine, c0, c1) == []


def test_positive_dimensional_connecting_spaces_are_refused(mocker):
    """Test that only rigid connecting spaces are enumerated."""
    engine = mocker.Mock()
    engine.data.n = 2
    source = mocker.Mock(id="c2", shifted_index=2)
    target = mocker.Mock(id="c0", shifted_index=0)

    with pytest.raises(DimensionError):
        enumerate_connecting(engine, source, target)


def test_chart_continuation_classifies_by_dwell(circle_engine):
    """Test that an arc held at c0 continues on the chart flow and breaks after the broken dwell."""
    data = circle_engine.data
    c0 = circle_engine.by_id["c0"]
    arc = circle_engine.integrate(data.state(np.array([2.0]), 0.0, 1e-12), stop=(ESCAPE,), hold=("c0",))
    assert arc.end == Endpoint(NEAR_CRITICAL, "c0")

    enumerator = ComponentEnumerator(circle_engine, {}, {}, {})
    t_in = float(arc.times[-1])
    dwell = enumerator.numerics.broken_dwell

    entry = enumerator.chart_sample(c0, arc, t_in)
    assert entry.residual == pytest.approx(data.slice_plus(arc.end_point), abs=1e-15)

    late = enumerator.chart_sample(c0, arc, t_in + dwell + 10.0)
    passage = late.arc.passages[-1]
    assert data.slice_plus(late.end) == pytest.approx(0.0, abs=1e-12)
    assert c0.distance(data, late.end) < circle_engine.ball
    assert late.residual == pytest.approx(entry.residual, rel=1e-6)
    assert not passage.exited
    assert passage.dwell == pytest.approx(dwell + 10.0)
    assert enumerator.is_broken(passage)

    early = enumerator.chart_sample(c0, arc, t_in + 10.0)
    assert not enumerator.is_broken(early.arc.passages[-1])


def flat_arc(level: float) -> FlowArc:
    return FlowArc(
        times=np.array([0.0, 1.0]),
        points=np.array([[level, 0.0, 0.0], [level, 0.0, 0.0]]),
        start=Endpoint(SLICE_MINUS),
        end=Endpoint(ESCAPE),
    )


def test_dagger_samples_carry_both_arcs(circle):
    """Test that a matched pair holds the arc nearest its parameter on either side."""
    arcs = (flat_arc(0.0), flat_arc(1.0))
    left = EvCurve("u", np.array([0.0, 1.0]), np.array([[0.0], [1.0]]), arcs)
    right = EvCurve("v", np.array([0.3]), np.array([[0.7]]), (flat_arc(0.7),))

    [sample] = build_dagger(circle, left, right)

    assert sample.left_arc is arcs[1]
    assert sample.right_arc is right.arcs[0]
    assert left.arc_at(0.2) is arcs[0]
    assert curve("w", [0.0], [[0.0]]).arc_at(0.0) is None

    rotation = builtin_map("rotation", circle, shift=np.array([0.5]))
    [hybrid] = build_hybrid(left, EvCurve("v", np.array([0.0]), np.array([[0.5]])), rotation, circle)
    assert hybrid.left_arc is arcs[0]
    assert hybrid.right_arc is None
