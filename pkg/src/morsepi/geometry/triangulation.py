"""Triangulations of the builtin models and vertex snapping."""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.transform import Rotation

from morsepi.exceptions import LoopProjectionError, TriangulationError
from morsepi.geometry.manifold import TWO_PI, ManifoldModel

# Columns generate the index-7 sublattice {(m, n): m + 3n = 0 mod 7};
# the quotient of the triangular lattice is the 7-vertex torus.
MINIMAL_TORUS_BASIS = np.array([[3, 1], [-1, 2]])

_TRIANGULAR_SHAPE = np.array([[1.0, 0.5], [0.0, np.sqrt(3.0) / 2.0]])
_TRIANGULAR_STEPS = ((1, 0), (0, 1), (-1, 1))


class VertexLocator(ABC):
    """Snaps sampled points to vertex labels."""

    @abstractmethod
    def snap(self, model: ManifoldModel, points: np.ndarray) -> list[int]:
        """Labels of the nearest vertices along a finely sampled path.

        Raises LoopProjectionError when two consecutive snaps are neither
        equal nor adjacent.
        """


class LatticeLocator(VertexLocator):
    """Vertices are Z^d modulo the column lattice of ``basis``.

    A lattice point v sits at angles ``origin + 2*pi*basis^-1 v``. Nearest
    vertices are measured in ``shape`` coordinates, the triangular metric
    in dimension 2.
    """

    def __init__(self, basis: np.ndarray, shape: np.ndarray, origin: np.ndarray, steps):
        self.basis = np.atleast_2d(np.asarray(basis, dtype=int))
        self.shape = np.atleast_2d(np.asarray(shape, dtype=float))
        self.origin = np.atleast_1d(np.asarray(origin, dtype=float))
        self.inverse = np.linalg.inv(self.basis.astype(float))
        self.steps = {tuple(s) for s in steps} | {tuple(-np.asarray(s)) for s in steps}
        self.representatives = self._representatives()
        self._labels = {rep: i for i, rep in enumerate(self.representatives)}

    def _representatives(self) -> list[tuple[int, ...]]:
        dim = self.basis.shape[0]
        bound = int(np.abs(self.basis).sum()) + 1
        found = []
        for v in itertools.product(range(-bound, bound + 1), repeat=dim):
            x = self.inverse @ np.array(v, dtype=float)
            if np.all(x > -1e-9) and np.all(x < 1.0 - 1e-9):
                found.append((tuple(np.round(x, 9)), v))
        found.sort()
        return [v for _, v in found]

    def reduce(self, v) -> tuple[int, ...]:
        v = np.asarray(v, dtype=int)
        shift = np.floor(self.inverse @ v + 1e-9).astype(int)
        return tuple(int(c) for c in v - self.basis @ shift)

    def label(self, v) -> int:
        return self._labels[self.reduce(v)]

    def position(self, v) -> np.ndarray:
        return self.origin + TWO_PI * (self.inverse @ np.asarray(v, dtype=float))

    def lattice_point(self, theta: np.ndarray) -> tuple[int, ...]:
        """Nearest lattice point to an unwrapped angle vector."""
        c = self.basis @ (np.asarray(theta, dtype=float) - self.origin) / TWO_PI
        base = np.floor(c).astype(int)
        best = None
        for corner in itertools.product((0, 1), repeat=len(c)):
            v = base + np.array(corner)
            gap = float(np.linalg.norm(self.shape @ (c - v)))
            key = (round(gap, 12), self.label(v), tuple(v))
            if best is None or key < best[0]:
                best = (key, tuple(int(x) for x in v))
        return best[1]

    def snap(self, model: ManifoldModel, points: np.ndarray) -> list[int]:
        lifted = model.lift(points)
        previous = None
        labels = []
        for i, theta in enumerate(lifted):
            v = self.lattice_point(theta)
            if previous is not None and v != previous:
                step = tuple(a - b for a, b in zip(v, previous))
                if step not in self.steps:
                    raise LoopProjectionError(
                        "Loop too coarse relative to triangulation", index=i
                    )
            previous = v
            labels.append(self.label(v))
        return labels


class NearestLocator(VertexLocator):
    """Nearest embedded vertex, ties broken by the lowest index."""

    def __init__(self, embedded: np.ndarray, edges: frozenset[tuple[int, int]]):
        self.embedded = embedded
        self.edges = edges

    def snap(self, model: ManifoldModel, points: np.ndarray) -> list[int]:
        labels = []
        for i, p in enumerate(np.atleast_2d(points)):
            gaps = np.round(np.linalg.norm(self.embedded - model.embed(p), axis=1), 12)
            label = int(np.argmin(gaps))
            if labels and label != labels[-1]:
                if (min(label, labels[-1]), max(label, labels[-1])) not in self.edges:
                    raise LoopProjectionError(
                        "Loop too coarse relative to triangulation", index=i
                    )
            labels.append(label)
        return labels


@dataclass(frozen=True)
class Triangulation:
    """A simplicial complex homeomorphic to a builtin model."""

    model_name: str
    dim: int
    vertices: np.ndarray
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    locator: VertexLocator = field(repr=False, compare=False)
    base_vertex: int = 0

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.triangles)

    def to_off(self, model: ManifoldModel) -> str:
        """Plain-text OFF export of the embedded complex."""
        top = self.triangles if self.dim == 2 else self.edges
        lines = ["OFF", f"{self.vertex_count} {len(top)} {len(self.edges)}"]
        for v in self.vertices:
            lines.append(" ".join(f"{x:.12g}" for x in model.embed(v)))
        for simplex in top:
            lines.append(" ".join([str(len(simplex)), *(str(i) for i in simplex)]))
        return "\n".join(lines) + "\n"


def triangulate(
    model: ManifoldModel, resolution: int = 0, base_point: np.ndarray | None = None
) -> Triangulation:
    """Triangulate a builtin model with vertex 0 at the base point.

    resolution 0 asks for the minimal complex. Otherwise it is the vertex
    count on the circle and the sphere (4, 6 or 12), and the grid side on
    the tori.
    """
    base = model.normalize(model.default_base_point() if base_point is None else base_point)

    if model.name == "sphere":
        tri = _sphere(model, resolution, base)
    elif model.dim == 1:
        count = resolution or 3
        if count < 3:
            raise TriangulationError("Circle needs at least 3 vertices")
        tri = _lattice(model, np.array([[count]]), np.eye(1), base, ((1,),))
    elif model.dim == 2:
        if resolution == 0:
            basis = MINIMAL_TORUS_BASIS
        elif resolution >= 3:
            basis = np.diag([resolution, resolution])
        else:
            raise TriangulationError(f"Torus grid side must be at least 3, got {resolution}")
        tri = _lattice(model, basis, _TRIANGULAR_SHAPE, base, _TRIANGULAR_STEPS)
    else:
        raise TriangulationError(f"No triangulation for model {model.name}")

    if tri.euler_characteristic != model.euler_characteristic:
        raise TriangulationError(
            "Euler characteristic mismatch",
            details={"complex": tri.euler_characteristic, "model": model.euler_characteristic},
        )
    return tri


def _lattice(model, basis, shape, base, steps) -> Triangulation:
    locator = LatticeLocator(basis, shape, base, steps)
    reps = locator.representatives
    dim = len(steps[0])

    edges = set()
    lifted_simplices = []
    for v in reps:
        v = np.array(v)
        for step in steps:
            w = v + np.array(step)
            a, b = locator.label(v), locator.label(w)
            if a == b:
                raise TriangulationError("Lattice too small: edge is a loop")
            edges.add((min(a, b), max(a, b)))
            if dim == 1:
                lifted_simplices.append((v, w))
        if dim == 2:
            e1, e2 = np.array([1, 0]), np.array([0, 1])
            lifted_simplices.append((v, v + e1, v + e2))
            lifted_simplices.append((v + e1, v + e2, v + e1 + e2))

    if len(edges) != len(steps) * len(reps):
        raise TriangulationError("Lattice too small: repeated edges")

    triangles = set()
    if dim == 2:
        for simplex in lifted_simplices:
            triangles.add(tuple(sorted(locator.label(v) for v in simplex)))
        if len(triangles) != 2 * len(reps):
            raise TriangulationError("Lattice too small: repeated triangles")

    for simplex in lifted_simplices:
        corners = np.array([locator.position(v) for v in simplex])
        _require_single_chart(model, [*corners, corners.mean(axis=0)])

    vertices = np.array([model.normalize(locator.position(v)) for v in reps])
    return Triangulation(
        model_name=model.name,
        dim=dim,
        vertices=vertices,
        edges=tuple(sorted(edges)),
        triangles=tuple(sorted(triangles)),
        locator=locator,
    )


_PHI = (1.0 + np.sqrt(5.0)) / 2.0


def _solid(resolution: int) -> np.ndarray:
    if resolution in (0, 4):
        return np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    if resolution == 6:
        return np.vstack([np.eye(3), -np.eye(3)])
    if resolution == 12:
        points = []
        for a, b in itertools.product((-1.0, 1.0), repeat=2):
            points += [[0, a, b * _PHI], [a, b * _PHI, 0], [b * _PHI, 0, a]]
        return np.array(points)
    raise TriangulationError(f"Sphere resolution must be 4, 6 or 12, got {resolution}")


def _sphere(model, resolution, base) -> Triangulation:
    solid = _solid(resolution)
    solid = solid / np.linalg.norm(solid, axis=1, keepdims=True)
    vertices = _rotate_onto(solid, solid[0], base)

    hull = ConvexHull(vertices)
    triangles = sorted(tuple(sorted(int(i) for i in face)) for face in hull.simplices)
    edges = sorted(
        {(a, b) for face in triangles for a, b in itertools.combinations(face, 2)}
    )
    for face in triangles:
        corners = vertices[list(face)]
        _require_single_chart(model, [*corners, model.normalize(corners.mean(axis=0))])

    return Triangulation(
        model_name=model.name,
        dim=2,
        vertices=vertices,
        edges=tuple(edges),
        triangles=tuple(triangles),
        locator=NearestLocator(vertices, frozenset(edges)),
    )


def _rotate_onto(points: np.ndarray, source: np.ndarray, target: np.ndarray) -> np.ndarray:
    axis = np.cross(source, target)
    sine = np.linalg.norm(axis)
    cosine = float(source @ target)
    angle = np.arctan2(sine, cosine)
    if sine < 1e-12:
        if cosine > 0:
            return points.copy()
        helper = np.array([1.0, 0.0, 0.0]) if abs(source[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = np.cross(source, helper)
        sine = np.linalg.norm(axis)
        angle = np.pi
    rotation = Rotation.from_rotvec(axis / sine * angle)
    return rotation.apply(points)


def _require_single_chart(model: ManifoldModel, points) -> None:
    normalized = [model.normalize(p) for p in points]
    for chart in model.charts:
        if all(chart.contains(p) for p in normalized):
            return
    raise TriangulationError("Simplex spans more than one chart")


__all__ = ["Triangulation", "triangulate", "LatticeLocator", "NearestLocator"]
