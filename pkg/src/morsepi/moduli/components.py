"""Tracing the one-dimensional spaces M(y, M) and M(*, M).

M(y, M) is the zero set of H(phi, t) = x-(flow_t(y + eps v(phi))), where
v(phi) runs over the unstable circle of y; negative t stays inside the
Morse chart ball and uses the linear flow. M(*, M) is the zero set of
H(s, T) = x-(flow_T(*, 0, s)). Both are followed with the pseudo-arclength
tracer until the flow lines break at an index-0 point.

A trace whose end reaches the chart ball of an index-0 point x settles:
it is continued on the exact linear flow of the chart of x, where H is
divided by the growth of the unstable mode, until the dwell in the ball
exceeds ``broken_dwell``. Limits that leave x again are solved exactly
once the dwell passes ``limit_dwell``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import partial
from typing import Callable

import numpy as np

from morsepi.config import ContinuationConfig, NumericsConfig
from morsepi.exceptions import DimensionError, InconsistentComponentError
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import (
    BACKWARD,
    ESCAPE,
    INTERIOR,
    NEAR_CRITICAL,
    SLICE_MINUS,
    SLICE_PLUS,
    BallPassage,
    Endpoint,
    FlowArc,
    FlowEngine,
)
from morsepi.geometry.manifold import wrap_angle
from morsepi.moduli.continuation import Evaluation, Trace, TracePoint, Tracer
from morsepi.moduli.dimensions import expected_dimension
from morsepi.moduli.shooting import Shot
from morsepi.moduli.types import (
    AUGMENTATION,
    STAR,
    BrokenConfiguration,
    ComponentSample,
    ModuliComponent,
    RigidArc,
    SpaceTag,
    ZeroLength,
)
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector

logger = get_logger(__name__)

_FD_STEPS = (1e-7, 1e-9, 1e-11, 1e-13)
_BETA_TOLERANCE = 0.05

# The trace came back to t <= 0, into the part of the space near y or *
RETURNED = "returned"


@dataclass(frozen=True)
class SamplePayload:
    """Endpoint of the sampled trajectory and, for positive times, its arc.

    Samples held in the chart ball of an index-0 point carry ``residual``,
    the slice coordinate divided by the growth of the unstable mode, and
    its time derivative ``rate``; their end is moved onto the slice.
    """

    end: np.ndarray
    arc: FlowArc | None = None
    residual: float | None = None
    rate: float = 0.0

    @property
    def held(self) -> bool:
        return self.residual is not None

    def value(self, data: StableMorseData) -> float:
        return data.slice_plus(self.end) if self.residual is None else self.residual


@dataclass(frozen=True)
class Settling:
    """The trace ended inside the chart ball of an index-0 point."""

    critical_id: str


def polyline_distance(point: np.ndarray, polyline: np.ndarray) -> float:
    """Distance from a point to a polyline given by its vertices."""
    polyline = np.atleast_2d(polyline)
    if len(polyline) == 1:
        return float(np.linalg.norm(point - polyline[0]))
    a, b = polyline[:-1], polyline[1:]
    ab = b - a
    lengths = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    t = np.clip(np.einsum("ij,ij->i", point - a, ab) / lengths, 0.0, 1.0)
    return float(np.min(np.linalg.norm(point - (a + t[:, None] * ab), axis=1)))


def polyline_hausdorff(first: np.ndarray, second: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines, vertex to segment."""
    there = max(polyline_distance(p, second) for p in first)
    back = max(polyline_distance(p, first) for p in second)
    return max(there, back)


class ComponentEnumerator:
    """Traces the components of M(y, M) and M(*, M) for one set of Morse data."""

    def __init__(
        self,
        engine: FlowEngine,
        augmentations: dict[str, list[RigidArc]],
        connecting: dict[tuple[str, str], list[RigidArc]],
        star_arcs: dict[str, list[RigidArc]],
        numerics: NumericsConfig | None = None,
        continuation: ContinuationConfig | None = None,
        metrics: MetricsCollector | None = None,
    ):
        self.engine = engine
        self.data = engine.data
        self.augmentations = {
            x_id: {arc.id: arc for arc in arcs} for x_id, arcs in augmentations.items()
        }
        self.connecting = connecting
        self.star_arcs = star_arcs
        self.numerics = numerics or engine.numerics
        self.continuation = continuation or ContinuationConfig()
        self.metrics = metrics
        self.index0 = {c.id for c in engine.critical_points if c.shifted_index == 0}

    # Parametrizations

    def ball_state(self, y: CriticalPoint, angle: float, t: float = 0.0) -> np.ndarray:
        """Point of the unstable manifold of y in its chart ball at time t <= 0."""
        eta = np.zeros(len(y.eigenvalues))
        unstable = np.flatnonzero(y.eigenvalues < 0.0)[:2]
        eta[unstable] = self.engine.ball * np.array([np.cos(angle), np.sin(angle)])
        return self.engine.linear_state(y, eta, self.engine.rates(y, 1.0), min(t, 0.0))

    def point_sample(
        self, y: CriticalPoint, angle: float, t: float, hold: CriticalPoint | None = None
    ) -> SamplePayload | None:
        if t <= 0.0:
            return SamplePayload(self.ball_state(y, angle, t))
        source = BallPassage(y.id, float("-inf"), 0.0, np.zeros(0))
        arc = self.engine.flow(
            self.ball_state(y, angle),
            t,
            start_kind=Endpoint(NEAR_CRITICAL, y.id),
            watch=(SLICE_PLUS,),
            initial_passages=(source,),
            hold=(hold.id,) if hold is not None else (),
        )
        return self._finish(arc, t, hold)

    def star_sample(self, s: float, t: float, hold: CriticalPoint | None = None) -> SamplePayload | None:
        start = self.data.state(self.data.base_point, 0.0, s)
        if t == 0.0:
            return SamplePayload(start)
        if t < 0.0:
            arc = self.engine.flow(start, -t, start_kind=Endpoint(SLICE_MINUS), direction=BACKWARD)
            return None if arc.end.kind == ESCAPE else SamplePayload(arc.end_point)
        arc = self.engine.flow(
            start,
            t,
            start_kind=Endpoint(SLICE_MINUS),
            watch=(SLICE_PLUS,),
            hold=(hold.id,) if hold is not None else (),
        )
        return self._finish(arc, t, hold)

    def _finish(self, arc: FlowArc, t: float, hold: CriticalPoint | None) -> SamplePayload | None:
        if hold is not None and arc.end.kind == NEAR_CRITICAL and arc.end.critical_id == hold.id:
            return self.chart_sample(hold, arc, t)
        if arc.end.kind == ESCAPE:
            return None
        return SamplePayload(arc.end_point, arc)

    def chart_sample(self, x: CriticalPoint, arc: FlowArc, t: float) -> SamplePayload:
        """Continue an arc that stopped on entering the ball of x by the chart flow up to time t.

        The slice coordinate at time t is L + sum_k w_k eta_k exp(r_k tau);
        dividing by the growth exp(r_u tau) of the unstable mode keeps it
        bounded for any dwell tau.
        """
        data = self.data
        t_in = float(arc.times[-1])
        tau = max(t - t_in, 0.0)
        eta = x.eigenvectors.T @ x.chart(data, arc.end_point)
        rates = self.engine.rates(x, 1.0)
        u = int(np.argmax(rates))
        others = np.arange(len(rates)) != u
        row = (x.basis @ x.eigenvectors)[data.coord_dim + 1]
        level = data.slice_plus(x.location)

        zeta = eta * np.exp(np.where(others, rates, 0.0) * tau)
        offset = level + float(row[others] @ zeta[others])
        growth = float(np.exp(-rates[u] * tau))
        residual = growth * offset + float(row[u] * eta[u])
        rate = growth * (float(row[others] @ ((rates[others] - rates[u]) * zeta[others])) - rates[u] * level)

        if abs(row[u]) > 1e-12:
            zeta[u] = -offset / row[u]
        else:
            zeta[u] = eta[u] * np.exp(rates[u] * tau)
        end = x.from_chart(data, x.eigenvectors @ zeta)

        entry = arc.passages[-1]
        extended = replace(
            arc,
            times=np.append(arc.times, t_in + tau) if tau > 0.0 else arc.times,
            points=np.vstack([arc.points, end]) if tau > 0.0 else arc.points,
            end=Endpoint(INTERIOR),
            passages=arc.passages[:-1] + (replace(entry, t_out=t_in + tau, exited=False),),
        )
        return SamplePayload(end, extended, residual, rate)

    def _evaluator(self, sample: Callable[[float, float], SamplePayload | None]):
        data = self.data

        def evaluate(z: np.ndarray) -> Evaluation | None:
            p, t = float(z[0]), float(z[1])
            here = sample(p, t)
            if here is None:
                return None
            value = here.value(data)
            if here.arc is None:
                return Evaluation(value, None, here)
            d_p = self._parameter_slope(sample, p, t, here.held)
            if d_p is None:
                return None
            d_t = here.rate if here.held else -data.vector_field(here.end)[data.coord_dim + 1]
            return Evaluation(value, np.array([d_p, d_t]), here)

        return evaluate

    def _parameter_slope(
        self, sample: Callable[[float, float], SamplePayload | None], p: float, t: float, held: bool
    ) -> float | None:
        """Central difference in the parameter.

        The step shrinks until both neighbours are sampled and held alike;
        the sensitivity grows exponentially with the time spent near x.
        """
        fallback = None
        for step in _FD_STEPS:
            plus, minus = sample(p + step, t), sample(p - step, t)
            if plus is None or minus is None:
                continue
            slope = (plus.value(self.data) - minus.value(self.data)) / (2.0 * step)
            if plus.held == held and minus.held == held:
                return slope
            fallback = slope
        return fallback

    def _metric(self, periodic: bool):
        def metric(a: TracePoint, b: TracePoint) -> float:
            dp = b.z[0] - a.z[0]
            if periodic:
                dp = float(wrap_angle(dp))
            return abs(dp) + self.data.distance(a.payload.end, b.payload.end)

        return metric

    def point_tracer(self, y: CriticalPoint, hold: CriticalPoint | None = None) -> Tracer:
        return Tracer(
            self._evaluator(lambda p, t: self.point_sample(y, p, t, hold)),
            self.continuation,
            self._metric(periodic=True),
            space=f"M({y.id},M)",
            metrics=self.metrics,
        )

    def star_tracer(self, hold: CriticalPoint | None = None) -> Tracer:
        return Tracer(
            self._evaluator(lambda s, t: self.star_sample(s, t, hold)),
            self.continuation,
            self._metric(periodic=False),
            space=f"M({self.data.base_label},M)",
            metrics=self.metrics,
        )

    # Broken limits

    def alpha_for(self, x_id: str, passage: BallPassage, arc: FlowArc) -> RigidArc:
        """The augmentation arc the trajectory follows after leaving x."""
        if not passage.exited:
            alpha_id = f"{x_id}#0"
        else:
            end = arc.times[-1] - 1e-9
            k = 1 + sum(1 for c in arc.crossings if c.kind == SLICE_PLUS and passage.t_out < c.time < end)
            alpha_id = f"{x_id}#{'+' if passage.exit_sign > 0 else '-'}{k}"
        try:
            return self.augmentations[x_id][alpha_id]
        except KeyError:
            raise InconsistentComponentError(
                f"Limit ends on unknown augmentation {alpha_id}", details={"point": x_id}
            ) from None

    def _index0_passage(self, arc: FlowArc) -> BallPassage | None:
        """First passage through an index-0 ball that ends the arc or outlasts the limit dwell."""
        for passage in arc.passages:
            if passage.critical_id not in self.index0 or not np.isfinite(passage.t_in):
                continue
            if not passage.exited or passage.dwell > self.numerics.limit_dwell:
                return passage
        return None

    def is_broken(self, passage: BallPassage) -> bool:
        """A limit at x is broken once the trajectory spends ``broken_dwell`` in the ball of x."""
        return passage.critical_id in self.index0 and passage.dwell > self.numerics.broken_dwell

    def _limit(
        self, points: list[TracePoint], beta_of: Callable[[str, float], RigidArc | None], held: bool
    ) -> BrokenConfiguration | Settling | None:
        last = points[-1]
        arc = last.payload.arc
        if arc is None:
            return None
        passage = self._index0_passage(arc)
        if passage is None:
            return None
        x_id = passage.critical_id
        if not passage.exited:
            if not held:
                return Settling(x_id)
            if not self.is_broken(passage):
                return None
        elif len(points) > 1 and points[-2].payload.arc is not None:
            previous = points[-2].payload.arc.passages_through(x_id)
            previous = [p for p in previous if np.isfinite(p.t_in)]
            if previous and np.linalg.norm(passage.entry_unstable) > np.linalg.norm(previous[0].entry_unstable) + 1e-15:
                return None

        beta = beta_of(x_id, float(last.z[0]))
        if beta is None:
            raise InconsistentComponentError(
                "No rigid arc matches a broken limit",
                details={"point": x_id, "parameter": float(last.z[0])},
            )
        if not any(self.is_broken(p) for p in beta.arc.passages_through(x_id)):
            raise InconsistentComponentError(
                "Matched rigid arc does not break at the limit point",
                details={"point": x_id, "beta": beta.id},
            )
        alpha = self.alpha_for(x_id, passage, arc)
        return BrokenConfiguration(
            beta=beta.id,
            alpha=alpha.id,
            legs=(beta.arc, alpha.arc),
            junctions=(x_id,),
            terminal=SLICE_PLUS,
            ev=alpha.ev_plus(self.data),
            slope=beta.slope,
            parameter=beta.parameter,
        )

    def _connecting_beta(self, y: CriticalPoint) -> Callable[[str, float], RigidArc | None]:
        def beta_of(x_id: str, angle: float) -> RigidArc | None:
            arcs = self.connecting.get((y.id, x_id), [])
            best = min(arcs, key=lambda a: abs(wrap_angle(a.parameter - angle)), default=None)
            if best is None or abs(wrap_angle(best.parameter - angle)) > _BETA_TOLERANCE:
                return None
            return best

        return beta_of

    def _star_beta(self, x_id: str, s: float) -> RigidArc | None:
        arcs = self.star_arcs.get(x_id, [])
        best = min(arcs, key=lambda a: abs(a.parameter - s), default=None)
        if best is None or abs(best.parameter - s) > _BETA_TOLERANCE:
            return None
        return best

    def _inspector(self, beta_of, returns: bool, held: bool = False):
        def inspect(points: list[TracePoint]):
            if returns and len(points) > 1 and points[-1].z[1] <= 0.0:
                return RETURNED
            return self._limit(points, beta_of, held)

        return inspect

    def _follow(
        self,
        tracer_for: Callable[[CriticalPoint | None], Tracer],
        seed: TracePoint,
        direction: np.ndarray,
        beta_of,
        component_id: str,
    ) -> Trace:
        """Trace from a seed; a trace that settles into an index-0 ball goes on in its chart."""
        first = tracer_for(None).trace(seed, direction, self._inspector(beta_of, returns=True), component_id)
        if not isinstance(first.reason, Settling):
            return first
        x = self.engine.by_id[first.reason.critical_id]
        tracer = tracer_for(x)
        points = list(first.points)
        heading = points[-1].z - points[-2].z if len(points) > 1 else np.asarray(direction, dtype=float)
        start = tracer.start(points[-1].z)
        settled = tracer.trace(start, heading, self._inspector(beta_of, returns=False, held=True), component_id)
        logger.debug(
            "Trace settled in a chart ball",
            component_id=component_id,
            point=x.id,
            steps=len(settled.points),
            elapsed=float(settled.points[-1].z[1] - points[-1].z[1]),
        )
        return Trace(tuple(points + list(settled.points[1:])), settled.outcome, settled.reason)

    # Assembly

    @staticmethod
    def _samples(points) -> tuple[ComponentSample, ...]:
        return tuple(ComponentSample(np.array(p.z, dtype=float), p.payload.end) for p in points)

    def _assemble(
        self,
        component_id: str,
        tag: SpaceTag,
        before: Trace | None,
        after: Trace,
        start: ZeroLength | None = None,
    ) -> ModuliComponent:
        """Join a trace run backwards with one run forwards from the same seed."""
        if before is None:
            points = list(after.points)
            ends = [start, after.reason]
            complete = after.complete
        else:
            points = list(before.points[::-1]) + list(after.points[1:])
            ends = [before.reason, after.reason]
            complete = before.complete and after.complete
        boundary = tuple(e for e in ends if isinstance(e, (BrokenConfiguration, ZeroLength)))
        if len(boundary) == 1 and complete:
            raise InconsistentComponentError(
                "Component with exactly one classified endpoint", component_id=component_id
            )
        return ModuliComponent(
            id=component_id,
            space=tag,
            samples=self._samples(points),
            boundary=boundary,
            distinguished=start is not None,
            complete=complete,
        )

    def _covered(self, end: np.ndarray, components: list[ModuliComponent]) -> bool:
        embedded = self.data.embed_state(end)
        tolerance = self.continuation.hausdorff_dedup
        return any(polyline_distance(embedded, c.endpoint_cloud(self.data)) <= tolerance for c in components)

    def _dedup(self, components: list[ModuliComponent]) -> list[ModuliComponent]:
        kept: list[ModuliComponent] = []
        for component in components:
            cloud = component.endpoint_cloud(self.data)
            if any(
                polyline_hausdorff(cloud, other.endpoint_cloud(self.data)) <= self.continuation.hausdorff_dedup
                for other in kept
            ):
                logger.debug("Duplicate component dropped", component_id=component.id)
                continue
            kept.append(component)
        return kept

    def _log(self, component: ModuliComponent) -> None:
        logger.info(
            "Component traced",
            space=str(component.space),
            component_id=component.id,
            samples=len(component.samples),
            boundary=[str(b) for b in component.boundary],
            complete=component.complete,
        )

    # Spaces

    def trace_point_space(self, y: CriticalPoint, shots: list[Shot]) -> list[ModuliComponent]:
        """Components of M(y, M) for an index-1 point.

        The component through the constant trajectory at y is traced first
        from the two angles where the unstable circle meets the slice; the
        remaining seeds are the slice crossings of the unstable-circle shots.
        """
        tag = SpaceTag(AUGMENTATION, y.id)
        if expected_dimension(AUGMENTATION, self.data.n, y.shifted_index) != 1:
            raise DimensionError(f"{tag} is not one-dimensional", expected=1)
        tracer_for = partial(self.point_tracer, y)
        tracer = tracer_for(None)
        beta_of = self._connecting_beta(y)
        up = np.array([0.0, 1.0])
        components: list[ModuliComponent] = []

        e1, e2 = y.unstable[:, 0], y.unstable[:, 1]
        angle = float(np.arctan2(-e1[-1], e2[-1]) % np.pi)
        first = self._follow(tracer_for, self._seed(tracer, angle, 0.0), up, beta_of, f"M({y.id})#0")
        if first.reason == RETURNED:
            component = ModuliComponent(f"M({y.id})#0", tag, self._samples(first.points))
        else:
            second = self._follow(
                tracer_for, self._seed(tracer, angle + np.pi, 0.0), up, beta_of, f"M({y.id})#0"
            )
            if second.reason == RETURNED:
                raise InconsistentComponentError(
                    "Only one branch through the constant trajectory returned", component_id=f"M({y.id})#0"
                )
            component = self._assemble(f"M({y.id})#0", tag, first, second)
        components.append(component)
        self._log(component)

        for shot in shots:
            for crossing in shot.arc.crossings:
                if crossing.kind != SLICE_PLUS or self._covered(crossing.state, components):
                    continue
                component_id = f"M({y.id})#{len(components)}"
                seed = self._seed(tracer, shot.parameter, crossing.time)
                forward = self._follow(tracer_for, seed, np.array([1.0, 0.0]), beta_of, component_id)
                backward = self._follow(tracer_for, seed, np.array([-1.0, 0.0]), beta_of, component_id)
                if RETURNED in (forward.reason, backward.reason):
                    logger.debug("Seed joins the component through y", seed=[float(v) for v in seed.z])
                    continue
                component = self._assemble(component_id, tag, backward, forward)
                components.append(component)
                self._log(component)
        return self._renumber(self._dedup(components), f"M({y.id})")

    def trace_star_space(self, shots: list[Shot]) -> list[ModuliComponent]:
        """Components of M(*, M); the first one carries the zero-length trajectory."""
        label = self.data.base_label
        tag = SpaceTag(STAR, label)
        tracer_for = self.star_tracer
        tracer = tracer_for(None)
        zero = ZeroLength(label, self.data.model.normalize(self.data.base_point))

        origin = TracePoint(np.zeros(2), 0.0, SamplePayload(self.data.state(self.data.base_point)))
        trace = self._follow(tracer_for, origin, np.array([0.0, 1.0]), self._star_beta, f"M({label})#0")
        if trace.reason == RETURNED:
            raise InconsistentComponentError("Distinguished component returned to T = 0", component_id=f"M({label})#0")
        distinguished = self._assemble(f"M({label})#0", tag, None, trace, start=zero)
        components = [distinguished]
        self._log(distinguished)

        for shot in shots:
            for crossing in shot.arc.crossings:
                if crossing.kind != SLICE_PLUS or self._covered(crossing.state, components):
                    continue
                component_id = f"M({label})#{len(components)}"
                seed = self._seed(tracer, shot.parameter, crossing.time)
                forward = self._follow(tracer_for, seed, np.array([1.0, 0.0]), self._star_beta, component_id)
                backward = self._follow(tracer_for, seed, np.array([-1.0, 0.0]), self._star_beta, component_id)
                if RETURNED in (forward.reason, backward.reason):
                    logger.debug("Seed joins the distinguished component", seed=[float(v) for v in seed.z])
                    continue
                component = self._assemble(component_id, tag, backward, forward)
                components.append(component)
                self._log(component)
        return self._renumber(self._dedup(components), f"M({label})")

    @staticmethod
    def _seed(tracer: Tracer, p: float, t: float) -> TracePoint:
        return tracer.start(np.array([p, t], dtype=float))

    @staticmethod
    def _renumber(components: list[ModuliComponent], prefix: str) -> list[ModuliComponent]:
        return [replace(c, id=f"{prefix}#{k}") for k, c in enumerate(components)]
