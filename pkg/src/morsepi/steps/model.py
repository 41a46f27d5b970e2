"""Morse steps, co-steps and loops, and the step graph they live on."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.spatial.distance import directed_hausdorff

from morsepi.exceptions import InconsistentComponentError, ValidationError
from morsepi.flowfield.data import StableMorseData
from morsepi.geometry.words import Word, invert_word, reduce_word
from morsepi.moduli.types import Boundary, BrokenConfiguration, ModuliComponent, ZeroLength

ALPHA_TOLERANCE = 1e-4


@dataclass(frozen=True)
class MorseStep:
    """An oriented boundary-bearing component through an index-1 point or the base point.

    ``index`` numbers the component in its step table; the letter of the
    step is ``sign * index``.
    """

    index: int
    component: ModuliComponent
    through: str
    sign: int = 1

    @property
    def letter(self) -> int:
        return self.sign * self.index

    @property
    def start(self) -> Boundary:
        return self.component.boundary[0 if self.sign > 0 else 1]

    @property
    def end(self) -> Boundary:
        return self.component.boundary[1 if self.sign > 0 else 0]

    @property
    def label(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}{self.component.id}({self.through})"

    def reversed(self) -> "MorseStep":
        return replace(self, sign=-self.sign)

    def ev_path(self, data: StableMorseData, stride: int = 1) -> np.ndarray:
        """ev+ along the component in the step's direction, boundary points included."""
        path = self.component.ev_path(data)
        if stride > 1 and len(path) > 2:
            keep = sorted(set(range(0, len(path), stride)) | {len(path) - 1})
            path = path[keep]
        return path if self.sign > 0 else path[::-1]


@dataclass(frozen=True)
class MorseCoStep(MorseStep):
    """A step of the mirrored data: through an index n-1 point or the aux base point."""


@dataclass(frozen=True)
class MorseLoop:
    """A word of consecutive steps; based loops start and end at the zero-length trajectory."""

    word: Word
    based: bool = True

    def reduced(self) -> "MorseLoop":
        return MorseLoop(reduce(self.word), self.based)

    def inverse(self) -> "MorseLoop":
        return MorseLoop(invert_word(self.word), self.based)

    def then(self, other: "MorseLoop") -> "MorseLoop":
        return MorseLoop(tuple(self.word) + tuple(other.word), self.based and other.based)

    def __len__(self) -> int:
        return len(self.word)

    @property
    def is_empty(self) -> bool:
        return not reduce(self.word)


def consecutive(end: Boundary, start: Boundary, tolerance: float = ALPHA_TOLERANCE) -> bool:
    """Whether a step ending at ``end`` can be followed by one starting at ``start``.

    Alphas are compared by identity first; differently named alphas count
    as equal when rooted at the same point and within ``tolerance`` in
    Hausdorff distance.
    """
    if isinstance(end, ZeroLength) or isinstance(start, ZeroLength):
        return isinstance(end, ZeroLength) and isinstance(start, ZeroLength) and end.base == start.base
    if not isinstance(end, BrokenConfiguration) or not isinstance(start, BrokenConfiguration):
        raise ValidationError("Unclassified endpoint in a junction")
    if end.alpha == start.alpha:
        return True
    if end.junctions[-1:] != start.junctions[-1:] or not end.legs or not start.legs:
        return False
    a, b = end.legs[-1].points, start.legs[-1].points
    gap = max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
    return gap < tolerance


def reduce(word: Sequence[int]) -> Word:
    """Cancel adjacent sigma sigma-bar pairs."""
    return reduce_word(word)


def endpoint_node(
item: Boundary) -> tuple[str, str]:
    """Vertex of the step graph: the alpha of a broken end, or the zero-length marker."""
    if isinstance(item, ZeroLength):
        return ("zero-length", item.base)
    if isinstance(item, BrokenConfiguration):
        return ("alpha", item.alpha)
    raise InconsistentComponentError(f"Unclassified step endpoint {item!r}")


class StepTable:
    """Steps numbered 1..k with the graph whose edges they are.

    Vertices are alpha arcs plus the zero-length trajectory; the loop group
    is the edge-path group of this graph based at the zero-length vertex,
    free on the steps outside a breadth-first spanning tree.
    """

    def __init__(self, steps: Iterable[MorseStep], base_label: str):
        self.base_label = base_label
        self.steps = {s.index: s for s in steps if s.sign > 0}
        self.root = ("zero-length", base_label)
        self.graph = nx.MultiGraph()
        self.graph.add_node(self.root)
        for index, step in sorted(self.steps.items()):
            self.graph.add_edge(endpoint_node(step.start), endpoint_node(step.end), key=index)
        self.tree, self.parent = self._spanning_tree()
        self.generators: tuple[int, ...] = tuple(i for i in sorted(self.steps) if i not in self.tree)
        self._generator_number = {index: k + 1 for k, index in enumerate(self.generators)}

    def _spanning_tree(self) -> tuple[set[int], dict]:
        tree: set[int] = set()
        parent: dict = {self.root: None}
        frontier = [self.root]
        while frontier:
            following = []
            for node in frontier:
                edges = sorted(self.graph.edges(node, keys=True), key=lambda e: e[2])
                for _, other, index in edges:
                    if other not in parent:
                        parent[other] = (node, index)
                        tree.add(index)
                        following.append(other)
            frontier = following
        return tree, parent

    def __len__(self) -> int:
        return len(self.steps)

    def __contains__(self, letter: int) -> bool:
        return abs(letter) in self.steps

    def step(self, letter: int) -> MorseStep:
        step = self.steps[abs(letter)]
        return step if letter > 0 else step.reversed()

    def letter_for(self, component_id: str, start_key: tuple[str, str]) -> int:
        """Letter of the step over ``component_id`` that starts at the given boundary key."""
        for index, step in self.steps.items():
            if step.component.id != component_id:
                continue
            if step.start.key == start_key:
                return index
            if step.end.key == start_key:
                return -index
        raise KeyError((component_id, start_key))

    def starting_at(self, key: tuple[str, str], through: str | None = None) -> list[int]:
        """Letters of all steps whose start carries the boundary key."""
        out = []
        for index, step in sorted(self.steps.items()):
            if through is not None and step.through != through:
                continue
            if step.start.key == key:
                out.append(index)
            if step.end.key == key:
                out.append(-index)
        return out

    @property
    def distinguished(self) -> int | None:
        """Letter of the step leaving the zero-length trajectory."""
        for index, step in self.steps.items():
            if step.component.distinguished:
                return index if step.start.is_zero_length else -index
        return None

    def node_of(self, letter: int, end: bool = True) -> tuple[str, str]:
        step = self.step(letter)
        return endpoint_node(step.end if end else step.start)

    def tree_path(self, node) -> Word:
        """Step word along the spanning tree from the zero-length vertex to ``node``."""
        letters = []
        while self.parent[node] is not None:
            previous, index = self.parent[node]
            step = self.steps[index]
            forward = endpoint_node(step.start) == previous and endpoint_node(step.end) == node
            letters.append(index if forward else -index)
            node = previous
        return tuple(reversed(letters))

    def fundamental_loop(self, index: int) -> MorseLoop:
        """Tree path to a generator step, the step, and the tree path back."""
        step = self.steps[index]
        head = self.tree_path(endpoint_node(step.start))
        tail = self.tree_path(endpoint_node(step.end))
        return MorseLoop(head + (index,) + invert_word(tail))

    def to_generators(self, word: Sequence[int]) -> Word:
        """Image in the free group on the off-tree steps."""
        out = []
        for letter in word:
            number = self._generator_number.get(abs(letter))
            if number is not None:
                out.append(number if letter > 0 else -number)
        return reduce_word(out)

    def from_generators(self, word: Sequence[int]) -> MorseLoop:
        """Based step loop representing a word in the generators."""
        letters: list[int] = []
        for g in word:
            loop = self.fundamental_loop(self.generators[abs(g) - 1])
            letters.extend(loop.word if g > 0 else invert_word(loop.word))
        return MorseLoop(tuple(letters))

    def generator_labels(self) -> list[str]:
        return [self.steps[i].component.id for i in self.generators]

    def check_consecutive(self, word: Sequence[int], based: bool = True) -> None:
        """Raise ValidationError at the first junction that is not consecutive."""
        if not word:
            return
        for position, (a, b) in enumerate(zip(word, word[1:])):
            if not consecutive(self.step(a).end, self.step(b).start):
                raise ValidationError(
                    "Steps are not consecutive",
                    field="word",
                    details={"position": position, "end": self.step(a).label, "start": self.step(b).label},
                )
        if based and (self.node_of(word[0], end=False) != self.root or self.node_of(word[-1]) != self.root):
            raise ValidationError("Based loop must start and end at the zero-length trajectory", field="word")

    def format(self, word: Sequence[int]) -> str:
        """One line per step, ``±componentId(throughPoint)``."""
        return "\n".join(self.step(letter).label for letter in word)
