"""Edge-path group of a triangulation, the independent pi_1 oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx
import numpy as np
from sympy import Matrix
from sympy.combinatorics.fp_groups import FpGroup, simplify_presentation
from sympy.combinatorics.free_groups import free_group

from morsepi.exceptions import GeometryError, LoopProjectionError
from morsepi.geometry.abelian import AbelianInvariants, abelianize
from morsepi.geometry.manifold import ManifoldModel
from morsepi.geometry.triangulation import Triangulation
from morsepi.geometry.words import Word, cyclic_reduce, exponent_vector, reduce_word

TRIVIAL = "trivial"
FREE_CYCLIC = "free-cyclic"
FREE_ABELIAN_2 = "free-abelian-2"
GENERIC = "generic"

BASE_TOLERANCE = 1e-6

@dataclass(frozen=True)
class OraclePresentation:
    """Generators are off-tree edges; one relator per triangle."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    kind: str
    abelian: AbelianInvariants
    edge_letters: dict[tuple[int, int], int] = field(default_factory=dict, compare=False)
    tree_parent: dict[int, int] = field(default_factory=dict, compare=False)
    base_vertex: int = 0

    def letter(self, a: int, b: int) -> int:
        """Letter read when traversing the edge from a to b (0 on tree edges)."""
        index = self.edge_letters[(min(a, b), max(a, b))]
        return index if a < b else -index

    def tree_path(self, vertex: int) -> list[int]:
        """Vertices from the base vertex to ``vertex`` along the spanning tree."""
        path = [vertex]
        while path[-1] != self.base_vertex:
            path.append(self.tree_parent[path[-1]])
        return path[::-1]

    def generator_cycle(self, index: int) -> list[int]:
        """Closed vertex path reading exactly the given generator."""
        edge = next(e for e, letter in self.edge_letters.items() if letter == index)
        a, b = edge
        return self.tree_path(a) + self.tree_path(b)[::-1]

    def is_trivial(self, word: Sequence[int]) -> bool:
        """Whether a word is the identity of the presented group.

        Decided exactly for the recognized kinds, whose groups are
        abelian with torsion-free abelianization: a word is trivial iff its
        exponent vector lies in the rational span of the relator vectors.
        """
        if self.kind == GENERIC:
            raise GeometryError("Word problem undecided for generic oracle kind")
        if self.kind == TRIVIAL:
            return True
        return in_relator_span(word, self.relators, len(self.generators))


def in_relator_span(word: Sequence[int], relators: Sequence[Sequence[int]], rank: int) -> bool:
    if not reduce_word(word):
        return True
    target = exponent_vector(word, rank)
    rows = [exponent_vector(r, rank) for r in relators if r]
    if not any(target):
        return True
    if not rows:
        return False
    return Matrix(rows).rank() == Matrix([*rows, target]).rank()


def simplify(generator_count: int, relators: Sequence[Sequence[int]]) -> tuple[int, list[Word]]:
    """Tietze-simplified presentation as (generator count, relators).

    Generators are eliminated as well as relators shortened; the
    survivors are renumbered from 1 in their original order.
    """
    if generator_count == 0:
        return 0, []
    names = ", ".join(f"g{i + 1}" for i in range(generator_count))
    _, *letters = free_group(names)
    elements = [_to_element(r, letters) for r in relators if reduce_word(r)]
    if not elements:
        return generator_count, []
    gens, rels = simplify_presentation(list(letters), elements, change_gens=True)
    names_kept = sorted((str(g) for g in gens), key=lambda name: int(name[1:]))
    index = {name: i + 1 for i, name in enumerate(names_kept)}
    simplified = [_from_element(r, index) for r in rels]
    return len(gens), [r for r in simplified if r]


def _to_element(word: Sequence[int], letters):
    element = letters[0] ** 0
    for letter in word:
        element = element * (letters[abs(letter) - 1] ** (1 if letter > 0 else -1))
    return element


def _from_element(element, index: dict[str, int]) -> Word:
    letters: list[int] = []
    for symbol, exponent in element.array_form:
        gen = index[str(symbol)]
        letters.extend([gen if exponent > 0 else -gen] * abs(exponent))
    return reduce_word(letters)


def is_commutator(word: Sequence[int]) -> bool:
    """Whether a relator is cyclically x y x^-1 y^-1 for two distinct generators, in either orientation."""
    core = cyclic_reduce(word)
    if len(core) != 4:
        return False
    p, q, r, s = core
    return abs(p) != abs(q) and r == -p and s == -q


def normal_form_kind(generator_count: int, relators: Sequence[Sequence[int]]) -> str:
    """Recognize trivial, Z and Z^2 presentations after simplification."""
    count, simplified = simplify(generator_count, relators)
    if count == 0:
        return TRIVIAL
    if count == 1 and not simplified:
        return FREE_CYCLIC
    if count == 2 and len(simplified) == 1 and is_commutator(simplified[0]):
        return FREE_ABELIAN_2
    return GENERIC


def edge_path_presentation(tri: Triangulation) -> OraclePresentation:
    """Presentation of the edge-path group based at the base vertex."""
    graph = nx.Graph()
    graph.add_nodes_from(range(tri.vertex_count))
    graph.add_edges_from(tri.edges)
    if not nx.is_connected(graph):
        raise GeometryError("Disconnected complex", details={"model": tri.model_name})

    tree = nx.bfs_tree(graph, tri.base_vertex)
    tree_edges = {(min(a, b), max(a, b)) for a, b in tree.edges()}
    parent = {b: a for a, b in tree.edges()}

    edge_letters: dict[tuple[int, int], int] = {}
    generators = []
    for edge in tri.edges:
        if edge in tree_edges:
            edge_letters[edge] = 0
        else:
            generators.append(f"e{edge[0]}-{edge[1]}")
            edge_letters[edge] = len(generators)

    def read(path: Sequence[int]) -> Word:
        letters = []
        for a, b in zip(path, path[1:]):
            index = edge_letters[(min(a, b), max(a, b))]
            if index:
                letters.append(index if a < b else -index)
        return reduce_word(letters)

    relators = tuple(read([a, b, c, a]) for a, b, c in tri.triangles)
    return OraclePresentation(
        generators=tuple(generators),
        relators=relators,
        kind=normal_form_kind(len(generators), relators),
        abelian=abelianize(len(generators), relators),
        edge_letters=edge_letters,
        tree_parent=parent,
        base_vertex=tri.base_vertex,
    )


def project_loop(
    model: ManifoldModel,
    tri: Triangulation,
    points: np.ndarray,
    oracle: OraclePresentation | None = None,
    embedded: bool = False,
) -> Word:
    """Edge word of the simplicial approximation of a based loop.

    Points are model coordinates, or embedded points when ``embedded``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if embedded:
        points = np.array([model.unembed(e) for e in points])
    oracle = oracle or edge_path_presentation(tri)

    base = tri.vertices[tri.base_vertex]
    for index in (0, len(points) - 1):
        if model.distance(points[index], base) > BASE_TOLERANCE:
            raise LoopProjectionError("Loop not based at the base vertex", index=index)

    labels = tri.locator.snap(model, points)
    letters = []
    for a, b in zip(labels, labels[1:]):
        if a != b:
            letter = oracle.letter(a, b)
            if letter:
                letters.append(letter)
    return reduce_word(letters)


def vertex_path_points(
    model: ManifoldModel, tri: Triangulation, path: Sequence[int], samples_per_edge: int = 16
) -> np.ndarray:
    """Polyline along the short paths between consecutive vertices."""
    points = [tri.vertices[path[0]]]
    for a, b in zip(path, path[1:]):
        for k in range(1, samples_per_edge + 1):
            points.append(model.geodesic(tri.vertices[a], tri.vertices[b], k / samples_per_edge))
    return np.array(points)
