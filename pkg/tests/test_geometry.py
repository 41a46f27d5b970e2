"""Tests for manifold models, triangulations and the edge-path oracle."""

import numpy as np
import pytest

from morsepi.exceptions import GeometryError, LoopProjectionError, ManifoldError, TriangulationError
from morsepi.geometry.manifold import ResolutionSettings, build_builtin
from morsepi.geometry.oracle import (
    FREE_ABELIAN_2,
    FREE_CYCLIC,
    GENERIC,
    TRIVIAL,
    OraclePresentation,
    edge_path_presentation,
    is_commutator,
    normal_form_kind,
    project_loop,
    vertex_path_points,
)
from morsepi.geometry.abelian import AbelianInvariants
from morsepi.geometry.triangulation import triangulate


@pytest.fixture(scope="module")
def circle():
    return build_builtin("circle")


@pytest.fixture(scope="module")
def torus():
    return build_builtin("torus")


@pytest.fixture(scope="module")
def sphere():
    return build_builtin("sphere")


def test_unknown_builtin_rejected():
    """Test that only builtin manifolds can be built."""
    with pytest.raises(ManifoldError):
        build_builtin("klein-bottle")
    with pytest.raises(ManifoldError):
        build_builtin("product-of-circles", ResolutionSettings(factors=3))
    with pytest.raises(ManifoldError):
        build_builtin("circle", ResolutionSettings(samples=0))


def test_product_of_circles(torus):
    """Test the product-of-circles model in one and two factors."""
    one = build_builtin("product-of-circles", ResolutionSettings(factors=1))
    two = build_builtin("product-of-circles", ResolutionSettings(factors=2))

    assert one.dim == 1 and one.coordinate_names == ("theta1",)
    assert two.dim == 2 and two.euler_characteristic == torus.euler_characteristic


def test_angle_models_wrap(circle):
    """Test that angles are normalized and distances measured around the circle."""
    p = circle.normalize(np.array([2 * np.pi + 0.25]))
    assert p[0] == pytest.approx(0.25)
    assert circle.distance(np.array([3.1]), np.array([-3.1])) == pytest.approx(2 * np.pi - 6.2)


def test_sphere_geodesic(sphere):
    """Test geodesic endpoints and unit length on the sphere."""
    p = sphere.normalize(np.array([1.0, 0.0, 0.0]))
    q = sphere.normalize(np.array([0.0, 1.0, 0.0]))
    mid = sphere.geodesic(p, q, 0.5)

    assert np.linalg.norm(mid) == pytest.approx(1.0)
    assert sphere.distance(p, mid) == pytest.approx(np.pi / 4)
    assert sphere.geodesic(p, q, 1.0) == pytest.approx(q)


def test_sphere_distance_at_small_separation(sphere):
    """Test that nearby points on the sphere keep their great-circle separation."""
    p = sphere.normalize(np.array([1.0, 0.0, 0.0]))
    angle = 1e-9
    q = sphere.normalize(np.array([np.cos(angle), np.sin(angle), 0.0]))

    assert sphere.distance(p, q) == pytest.approx(angle, rel=1e-6)
    assert sphere.distance(p, p) == 0.0
    assert sphere.distance(p, -p) == pytest.approx(np.pi)
    assert np.linalg.norm(sphere.difference(p, q)) == pytest.approx(angle, rel=1e-6)


@pytest.mark.parametrize(
    ("name", "resolution", "vertices", "kind", "rank"),
    [
        ("circle", 0, 3, FREE_CYCLIC, 1),
        ("circle", 6, 6, FREE_CYCLIC, 1),
        ("torus", 0, 7, FREE_ABELIAN_2, 2),
        ("torus", 3, 9, FREE_ABELIAN_2, 2),
        ("sphere", 0, 4, TRIVIAL, 0),
        ("sphere", 6, 6, TRIVIAL, 0),
        ("sphere", 12, 12, TRIVIAL, 0),
    ],
)
def test_edge_path_groups(name, resolution, vertices, kind, rank):
    """Test triangulations and the recognized edge-path groups of the builtins."""
    model = build_builtin(name)
    tri = triangulate(model, resolution)
    oracle = edge_path_presentation(tri)

    assert tri.vertex_count == vertices
    assert tri.euler_characteristic == model.euler_characteristic
    assert oracle.kind == kind
    assert oracle.abelian == AbelianInvariants(rank=rank)
    assert len(oracle.generators) == len(tri.edges) - vertices + 1


def test_base_vertex_sits_at_base_point(torus):
    """Test that vertex 0 of a triangulation is the base point."""
    base = np.array([1.1, 2.0])
    tri = triangulate(torus, 0, base)
    assert torus.distance(tri.vertices[tri.base_vertex], base) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(("name", "resolution"), [("circle", 2), ("torus", 2), ("sphere", 5)])
def test_invalid_resolutions(name, resolution):
    """Test that unsupported resolutions raise TriangulationError."""
    with pytest.raises(TriangulationError):
        triangulate(build_builtin(name), resolution)


def test_off_export(sphere):
    """Test the OFF header of the tetrahedral sphere."""
    tri = triangulate(sphere)
    lines = tri.to_off(sphere).splitlines()
    assert lines[0] == "OFF"
    assert lines[1] == "4 4 6"


def test_once_around_loop_is_a_generator(circle):
    """Test that the once-around loop projects to a generator and its reverse to the inverse."""
    base = np.array([1.2])
    tri = triangulate(circle, 0, base)
    oracle = edge_path_presentation(tri)
    points = (base + np.linspace(0.0, 2 * np.pi, 200))[:, None]

    forward = project_loop(circle, tri, points, oracle)
    backward = project_loop(circle, tri, points[::-1], oracle)

    assert forward in ((1,), (-1,))
    assert backward == tuple(-x for x in forward)
    assert oracle.is_trivial(forward + backward)
    assert not oracle.is_trivial(forward)


def test_back_and_forth_loop_is_trivial(circle):
    """Test that a loop retracing itself projects to the empty word."""
    base = np.array([1.2])
    tri = triangulate(circle, 0, base)
    there = np.linspace(0.0, 4.0, 100)
    points = (base + np.concatenate([there, there[::-1]]))[:, None]

    assert project_loop(circle, tri, points) == ()


def test_unbased_loop_rejected(circle):
    """Test that loops must start and end at the base vertex."""
    tri = triangulate(circle, 0, np.array([1.2]))
    points = np.linspace(0.0, 1.0, 20)[:, None]

    with pytest.raises(LoopProjectionError):
        project_loop(circle, tri, points)


def test_coarse_loop_rejected(torus):
    """Test that a jump across several simplices raises LoopProjectionError."""
    base = np.array([1.1, 2.0])
    tri = triangulate(torus, 3, base)
    points = np.array([base, base + 3.0, base])

    with pytest.raises(LoopProjectionError):
        project_loop(torus, tri, points)


@pytest.mark.parametrize("name", ["circle", "torus"])
def test_generator_cycles_read_their_generator(name):
    """Test that the vertex cycle of each oracle generator projects back to it."""
    model = build_builtin(name)
    tri = triangulate(model)
    oracle = edge_path_presentation(tri)

    for k in range(1, len(oracle.generators) + 1):
        points = vertex_path_points(model, tri, oracle.generator_cycle(k))
        assert project_loop(model, tri, points, oracle) == (k,)


def test_triangle_relators_are_trivial(torus):
    """Test that every triangle relator is trivial in the oracle group."""
    oracle = edge_path_presentation(triangulate(torus))
    assert all(oracle.is_trivial(r) for r in oracle.relators)


@pytest.mark.parametrize(
    ("count", "relators", "kind"),
    [
        (0, [], TRIVIAL),
        (1, [(1,)], TRIVIAL),
        (1, [], FREE_CYCLIC),
        (2, [(1, -2)], FREE_CYCLIC),
        (2, [(2, 1, -2, -1)], FREE_ABELIAN_2),
        (2, [], GENERIC),
        (1, [(1, 1)], GENERIC),
    ],
)
def test_normal_form_kind(count, relators, kind):
    """Test recognition of trivial, cyclic and rank two abelian presentations."""
    assert normal_form_kind(count, relators) == kind


def test_generic_word_problem_undecided():
    """Test that the oracle refuses the word problem for unrecognized groups."""
    oracle = OraclePresentation(
        generators=("a", "b"), relators=(), kind=GENERIC, abelian=AbelianInvariants(rank=2)
    )
    with pytest.raises(GeometryError):
        oracle.is_trivial((1,))


@pytest.mark.parametrize(
    ("word", "expected"),
    [
        ((1, 2, -1, -2), True),
        ((2, 1, -2, -1), True),
        ((-1, 2, 1, -2), True),
        ((3, 1, 2, -1, -2, -3), True),
        ((1, 1, -1, -1), False),
        ((1, 2, -2, -1), False),
        ((1, 2, -1), False),
    ],
)
def test_is_commutator(word, expected):
    """Test recognition of cyclic commutator relators."""
    assert is_commutator(word) is expected


def test_torus_oracle_is_free_abelian(torus):
    """Test that the torus triangulation simplifies to a single commutator."""
    oracle = edge_path_presentation(triangulate(torus))

    assert oracle.kind == FREE_ABELIAN_2
    assert oracle.abelian.rank == 2


def test_torus_word_problem():
    """Test that generator cycles commute in the torus oracle but are not trivial."""
    model = build_builtin("torus")
    tri = triangulate(model)
    oracle = edge_path_presentation(tri)
    words = [
        project_loop(model, tri, vertex_path_points(model, tri, oracle.generator_cycle(k)), oracle)
        for k in range(1, len(oracle.generators) + 1)
    ]
    nontrivial = [w for w in words if not oracle.is_trivial(w)]
    assert len(nontrivial) >= 2

    a, b = nontrivial[0], nontrivial[1]
    inverse = lambda w: tuple(-x for x in reversed(w))  # noqa: E731
    assert oracle.is_trivial(a + b + inverse(a) + inverse(b))
    assert not oracle.is_trivial(a + a)


def test_sphere_oracle_is_trivial(sphere):
    """Test that every generator of the sphere oracle is eliminated."""
    oracle = edge_path_presentation(triangulate(sphere))

    assert oracle.kind == TRIVIAL
    assert oracle.is_trivial((1, 2, 1))
