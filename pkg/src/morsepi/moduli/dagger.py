"""Bouncing and hybrid fiber products: pairs with ev+(u) = ev-(v)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from morsepi.exceptions import DimensionError
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import FlowArc
from morsepi.geometry.manifold import ManifoldModel
from morsepi.moduli.types import ModuliComponent, RigidArc
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

MATCH_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EvCurve:
    """Evaluation points of a sampled family, in model coordinates.

    One point is a rigid family; several points form a polyline. ``arcs``
    holds the flow arc behind each point where one is known.
    """

    id: str
    parameters: np.ndarray
    points: np.ndarray
    arcs: tuple[FlowArc | None, ...] = field(default_factory=tuple)

    @classmethod
    def from_component(cls, data: StableMorseData, component: ModuliComponent) -> "EvCurve":
        points = np.array([data.model.normalize(data.point(s.end)) for s in component.samples])
        return cls(component.id, np.linspace(0.0, 1.0, len(points)), points)

    @classmethod
    def from_arcs(cls, data: StableMorseData, id_: str, arcs: Sequence[RigidArc], end: str = "minus") -> "EvCurve":
        ev = (lambda a: a.ev_minus(data)) if end == "minus" else (lambda a: a.ev_plus(data))
        points = np.array([ev(a) for a in arcs])
        return cls(id_, np.array([a.parameter for a in arcs], dtype=float), points, tuple(a.arc for a in arcs))

    def arc_at(self, parameter: float) -> FlowArc | None:
        if not self.arcs:
            return None
        return self.arcs[int(np.argmin(np.abs(self.parameters - parameter)))]


@dataclass(frozen=True)
class DaggerSample:
    """One matched pair: both parameters, the common point and the arcs on either side."""

    left_id: str
    right_id: str
    left_parameter: float
    right_parameter: float
    point: np.ndarray
    gap: float
    left_arc: FlowArc | None = None
    right_arc: FlowArc | None = None


Refine = Callable[[DaggerSample], DaggerSample | None]


def _local(model: ManifoldModel, origin: np.ndarray, points: np.ndarray) -> np.ndarray:
    basis = model.tangent_basis(origin)
    return np.array([basis.T @ model.difference(origin, p) for p in points])


def _contained(model: ManifoldModel, left: EvCurve, right: EvCurve) -> list[DaggerSample]:
    """Right points projected onto left segments; the gap is the residual distance."""
    out = []
    for j, q in enumerate(right.points):
        for i in range(len(left.points) - 1):
            a, b = left.points[i], left.points[i + 1]
            db, dq = _local(model, a, [b, q])
            if not db @ db > 0.0:
                continue
            lam = float(dq @ db / (db @ db))
            if 0.0 <= lam <= 1.0:
                on_left = model.geodesic(a, b, lam)
                out.append(
                    DaggerSample(
                        left.id,
                        right.id,
                        float(left.parameters[i] + lam * (left.parameters[i + 1] - left.parameters[i])),
                        float(right.parameters[j]),
                        model.normalize(q),
                        model.distance(on_left, q),
                    )
                )
    return out


def _intersections(model: ManifoldModel, left: EvCurve, right: EvCurve) -> list[DaggerSample]:
    """Crossings of the two polylines, computed segment by segment."""
    out = []
    for i in range(len(left.points) - 1):
        a = left.points[i]
        for j in range(len(right.points) - 1):
            b, q0, q1 = _local(model, a, [left.points[i + 1], right.points[j], right.points[j + 1]])
            matrix = np.column_stack([b, q0 - q1])
            if abs(np.linalg.det(matrix)) < 1e-14:
                continue
            lam, mu = np.linalg.solve(matrix, q0)
            if 0.0 <= lam <= 1.0 and 0.0 <= mu <= 1.0:
                p = model.geodesic(a, left.points[i + 1], lam)
                q = model.geodesic(right.points[j], right.points[j + 1], mu)
                out.append(
                    DaggerSample(
                        left.id,
                        right.id,
                        float(left.parameters[i] + lam * (left.parameters[i + 1] - left.parameters[i])),
                        float(right.parameters[j] + mu * (right.parameters[j + 1] - right.parameters[j])),
                        model.normalize(p),
                        model.distance(p, q),
                    )
                )
    return out


def build_dagger(
    model: ManifoldModel,
    left: EvCurve,
    right: EvCurve,
    refine: Refine | None = None,
    tolerance: float = MATCH_TOLERANCE,
) -> list[DaggerSample]:
    """Pairs (u, v) with ev+(u) = ev-(v) between two sampled families.

    On a one-dimensional model the right points are located on the left
    polyline; on a surface the two polylines are intersected. ``refine``
    may sharpen each candidate; candidates whose gap stays above
    ``tolerance`` are dropped. An empty result is a valid fiber product.
    """
    if len(left.points) == 0 or len(right.points) == 0:
        return []
    if len(left.points) == 1 and len(right.points) == 1:
        gap = model.distance(left.points[0], right.points[0])
        candidates = [
            DaggerSample(left.id, right.id, float(left.parameters[0]), float(right.parameters[0]), left.points[0], gap)
        ]
    elif model.dim == 1 or len(right.points) == 1:
        candidates = _contained(model, left, right)
    elif model.dim == 2:
        candidates = _intersections(model, left, right)
    else:
        raise DimensionError(f"Fiber products over a {model.dim}-dimensional model are not built")

    out = []
    for candidate in candidates:
        if refine is not None:
            candidate = refine(candidate)
            if candidate is None:
                continue
        if candidate.gap <= tolerance:
            out.append(
                replace(
                    candidate,
                    left_arc=candidate.left_arc or left.arc_at(candidate.left_parameter),
                    right_arc=candidate.right_arc or right.arc_at(candidate.right_parameter),
                )
            )
    logger.debug("Fiber product built", left=left.id, right=right.id, candidates=len(candidates), matched=len(out))
    return out


def build_hybrid(
    left: EvCurve,
    right: EvCurve,
    phi: Callable[[np.ndarray], np.ndarray],
    target: ManifoldModel,
    refine: Refine | None = None,
    tolerance: float = MATCH_TOLERANCE,
) -> list[DaggerSample]:
    """Fiber product over a map: phi(ev+(u)) = ev-(v) on the target model."""
    mapped = EvCurve(
        left.id, left.parameters, np.array([target.normalize(phi(p)) for p in left.points]), left.arcs
    )
    return build_dagger(target, mapped, right, refine, tolerance)


def hybrid_margin(left: EvCurve, right_points: np.ndarray, phi, target: ManifoldModel) -> float:
    """Smallest distance between the mapped left evaluations and the right points."""
    if len(left.points) == 0 or len(right_points) == 0:
        return float("inf")
    mapped = [target.normalize(phi(p)) for p in left.points]
    return min(target.distance(p, q) for p in mapped for q in right_points)
