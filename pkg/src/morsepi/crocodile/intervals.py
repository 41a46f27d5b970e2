"""Piecewise-linear interval maps and the component of their fiber product.

Everything here is exact: breakpoints and values are Fractions, so
plateau detection, critical values and the commutation check carry no
rounding.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import networkx as nx

from morsepi.exceptions import FiberProductError, ValidationError
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

Point = tuple[Fraction, Fraction]


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


@dataclass(frozen=True)
class IntervalMap:
    """Piecewise-linear map [0, 1] -> [0, 1] given by its breakpoints."""

    domain: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        domain = tuple(Fraction(d) for d in self.domain)
        values = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", values)
        if len(domain) < 2 or len(domain) != len(values):
            raise ValidationError("An interval map needs matching breakpoints and values", field="domain")
        if domain[0] != ZERO or domain[-1] != ONE:
            raise ValidationError("Breakpoints must run from 0 to 1", field="domain")
        if any(b <= a for a, b in zip(domain, domain[1:])):
            raise ValidationError("Breakpoints must increase strictly", field="domain")
        if any(v < ZERO or v > ONE for v in values):
            raise ValidationError("Values must lie in [0, 1]", field="values")

    @classmethod
    def from_points(cls, pairs: Iterable[tuple[object, object]]) -> "IntervalMap":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def identity(cls) -> "IntervalMap":
        return cls((ZERO, ONE), (ZERO, ONE))

    @classmethod
    def uniform(cls, values: Sequence[object]) -> "IntervalMap":
        """Values placed at equally spaced breakpoints."""
        count = len(values) - 1
        return cls(tuple(Fraction(k, count) for k in range(count + 1)), tuple(values))

    def __call__(self, s: object) -> Fraction:
        s = Fraction(s)
        if s < ZERO or s > ONE:
            raise ValidationError("Argument outside [0, 1]", details={"s": str(s)})
        i = min(bisect_right(self.domain, s), len(self.domain) - 1) - 1
        i = max(i, 0)
        a, b = self.domain[i], self.domain[i + 1]
        return self.values[i] + (self.values[i + 1] - self.values[i]) * (s - a) / (b - a)

    def __len__(self) -> int:
        return len(self.domain)

    @property
    def signs(self) -> tuple[int, ...]:
        """Slope sign of each piece."""
        return tuple(_sign(b - a) for a, b in zip(self.values, self.values[1:]))

    def critical_values(self) -> set[Fraction]:
        """Plateau values and values at interior breakpoints where the slope sign changes."""
        signs = self.signs
        out = {self.values[i] for i, s in enumerate(signs) if s == 0}
        for k in range(1, len(signs)):
            if signs[k - 1] != signs[k]:
                out.add(self.values[k])
        return out

    def kept_indices(self, keep: Iterable[int] = ()) -> list[int]:
        """Breakpoints that survive compression: turning points, plateau ends and ``keep``."""
        keep = set(keep)
        signs = self.signs
        indices = [0]
        for k in range(1, len(self.domain) - 1):
            if k in keep or signs[k - 1] != signs[k] or signs[k] == 0:
                indices.append(k)
        indices.append(len(self.domain) - 1)
        return indices

    def compressed(self, keep: Iterable[int] = ()) -> "IntervalMap":
        """Drop interior breakpoints inside monotone runs."""
        indices = self.kept_indices(keep)
        return IntervalMap(tuple(self.domain[k] for k in indices), tuple(self.values[k] for k in indices))

    def csv_rows(self) -> list[list[str]]:
        return [[str(d), str(v), f"{float(d):.12g}", f"{float(v):.12g}"] for d, v in zip(self.domain, self.values)]


def _cell_segment(
    s0: Fraction, s1: Fraction, a0: Fraction, p: Fraction,
    t0: Fraction, t1: Fraction, b0: Fraction, q: Fraction,
) -> tuple[Point, Point] | None:
    """The part of {a0 + p (s - s0) = b0 + q (t - t0)} inside one cell.

    ``p`` and ``q`` are the slopes of the two pieces over the cell.
    """
    if p == 0 and q == 0:
        if a0 == b0:
            raise FiberProductError("Two plateaus at the same value", value=a0)
        return None
    if q == 0:
        s = s0 + (b0 - a0) / p
        return ((s, t0), (s, t1)) if s0 <= s <= s1 else None
    if p == 0:
        t = t0 + (a0 - b0) / q
        return ((s0, t), (s1, t)) if t0 <= t <= t1 else None

    found: set[Point] = set()
    for s in (s0, s1):
        t = t0 + (a0 + p * (s - s0) - b0) / q
        if t0 <= t <= t1:
            found.add((s, t))
    for t in (t0, t1):
        s = s0 + (b0 + q * (t - t0) - a0) / p
        if s0 <= s <= s1:
            found.add((s, t))
    if len(found) < 2:
        return None
    ordered = sorted(found)
    return ordered[0], ordered[-1]


def fiber_graph(alpha: IntervalMap, beta: IntervalMap) -> nx.Graph:
    """The fiber set {alpha(s) = beta(t)} as a graph of exact segments."""
    graph = nx.Graph()
    for i in range(len(alpha.domain) - 1):
        s0, s1 = alpha.domain[i], alpha.domain[i + 1]
        a0, a1 = alpha.values[i], alpha.values[i + 1]
        if max(a0, a1) < min(beta.values) or min(a0, a1) > max(beta.values):
            continue
        p = (a1 - a0) / (s1 - s0)
        for j in range(len(beta.domain) - 1):
            t0, t1 = beta.domain[j], beta.domain[j + 1]
            b0, b1 = beta.values[j], beta.values[j + 1]
            if max(a0, a1) < min(b0, b1) or min(a0, a1) > max(b0, b1):
                continue
            q = (b1 - b0) / (t1 - t0)
            segment = _cell_segment(s0, s1, a0, p, t0, t1, b0, q)
            if segment is not None and segment[0] != segment[1]:
                graph.add_edge(*segment)
    return graph


def _parametrize(path: list[Point]) -> tuple[IntervalMap, IntervalMap]:
    """Both coordinates of a polyline, over its normalized L1 length."""
    lengths = [ZERO]
    for (s0, t0), (s1, t1) in zip(path, path[1:]):
        lengths.append(lengths[-1] + abs(s1 - s0) + abs(t1 - t0))
    total = lengths[-1]
    domain = tuple(length / total for length in lengths)
    return (
        IntervalMap(domain, tuple(s for s, _ in path)),
        IntervalMap(domain, tuple(t for _, t in path)),
    )


def fiber_component(alpha: IntervalMap, beta: IntervalMap) -> tuple[IntervalMap, IntervalMap]:
    """The component of {alpha(s) = beta(t)} joining (0, 0) to (1, 1).

    Returns ``(phi_alpha, phi_beta)`` with ``alpha(phi_alpha(r)) ==
    beta(phi_beta(r))`` for every r, both sending 0 to 0 and 1 to 1.
    Requires alpha and beta to fix the endpoints and to share no critical
    value, so that the fiber set is a disjoint union of arcs and circles.
    """
    for name, f in (("alpha", alpha), ("beta", beta)):
        if f.values[0] != ZERO or f.values[-1] != ONE:
            raise FiberProductError(f"{name} must send 0 to 0 and 1 to 1")
    shared = alpha.critical_values() & beta.critical_values()
    if shared:
        raise FiberProductError("Maps share a critical value", value=min(shared))

    graph = fiber_graph(alpha, beta)
    start, finish = (ZERO, ZERO), (ONE, ONE)
    if start not in graph:
        raise FiberProductError("The fiber set misses (0, 0)")
    component = nx.node_connected_component(graph, start)
    if finish not in component:
        raise FiberProductError("No component joins (0, 0) to (1, 1)")
    branching = [n for n in component if graph.degree(n) > 2]
    if branching:
        raise FiberProductError("The fiber set branches", value=branching[0])

    path = nx.shortest_path(graph, start, finish)
    phi_alpha, phi_beta = _parametrize(path)
    for r in phi_alpha.domain:
        if alpha(phi_alpha(r)) != beta(phi_beta(r)):
            raise FiberProductError("Traced component does not commute", value=r)
    logger.debug("Fiber component traced", vertices=len(path), graph_edges=graph.number_of_edges())
    return phi_alpha, phi_beta
