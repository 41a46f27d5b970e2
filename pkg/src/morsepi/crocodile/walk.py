"""Crocodile walks along the corner-bearing boundary of M(gamma, M).

M(gamma, M) holds the trajectories that start on the slice x+ = 0 over a
point gamma(tau) of the loop and end on the slice x- = 0. Its boundary
alternates between lower steps, where tau is frozen at a corner while the
trajectory runs through a Morse step, and upper steps, where the
trajectory breaks at an index-0 point x with a fixed alpha after it while
tau moves. An upper step is traced as the zero set of the growing chart
coordinate at x over (tau, s), s being the x- coordinate of the start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from morsepi.config import Settings
from morsepi.exceptions import (
    ContinuationStallError,
    InconsistentComponentError,
    TransversalityError,
    ValidationError,
    WalkLimitError,
)
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.integrator import ESCAPE, SLICE_MINUS, Endpoint, FlowArc
from morsepi.geometry.manifold import TWO_PI, ManifoldModel
from morsepi.geometry.words import format_word
from morsepi.moduli.continuation import Evaluation, TracePoint, Tracer
from morsepi.moduli.inventory import ModuliInventory
from morsepi.moduli.shooting import AdaptiveShooter, first_passage
from morsepi.moduli.types import BrokenConfiguration, RigidArc, ZeroLength
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector
from morsepi.steps.model import MorseLoop, StepTable

logger = get_logger(__name__)

# Corner kinds
ZERO_LENGTH_CORNER = "zero-length"
ONCE_BROKEN = "once-broken"
TWICE_BROKEN = "twice-broken"

# Edge kinds
LOWER = "lower"
UPPER = "upper"

DOWNWARD = "downward"
UPWARD = "upward"

_FD_STEP = 1e-7
_BETA_TOLERANCE = 0.05


@dataclass(frozen=True)
class LoopPath:
    """A closed polyline parametrized by normalized arclength, extended periodically."""

    model: ManifoldModel
    points: np.ndarray
    knots: np.ndarray

    @classmethod
    def from_points(cls, model: ManifoldModel, points: np.ndarray) -> "LoopPath":
        points = np.array([model.normalize(p) for p in np.asarray(points, dtype=float)])
        if len(points) == 1:
            points = np.vstack([points, points])
        lengths = np.array([model.distance(p, q) for p, q in zip(points, points[1:])])
        total = float(lengths.sum())
        if total > 0.0:
            knots = np.concatenate([[0.0], np.cumsum(lengths) / total])
        else:
            knots = np.linspace(0.0, 1.0, len(points))
        knots[-1] = 1.0
        return cls(model, points, knots)

    @property
    def base(self) -> np.ndarray:
        return self.points[0]

    def __call__(self, tau: float) -> np.ndarray:
        tau = float(tau)
        if not 0.0 <= tau <= 1.0:
            tau %= 1.0
        i = int(np.clip(np.searchsorted(self.knots, tau, side="right") - 1, 0, len(self.knots) - 2))
        width = self.knots[i + 1] - self.knots[i]
        lam = 0.0 if width <= 0.0 else float(np.clip((tau - self.knots[i]) / width, 0.0, 1.0))
        return self.model.geodesic(self.points[i], self.points[i + 1], lam)

    def resample(self, count: int) -> np.ndarray:
        return np.array([self(t) for t in np.linspace(0.0, 1.0, count)])


def conjugate_loop(
    model: ManifoldModel, points: np.ndarray, path: np.ndarray
) -> tuple[np.ndarray, tuple[float, float]]:
    """path^-1 . loop . path, and the loop-time window the original loop occupies.

    ``path`` runs from the loop's base point to the new base point.
    """
    points = np.asarray(points, dtype=float)
    path = np.asarray(path, dtype=float)
    if len(path) < 2:
        return points, (0.0, 1.0)
    combined = np.vstack([path[::-1], points[1:], path[1:]])
    lengths = [model.distance(p, q) for p, q in zip(combined, combined[1:])]
    total = sum(lengths)
    if total <= 0.0:
        return combined, (0.0, 1.0)
    head = sum(lengths[: len(path) - 1]) / total
    tail = sum(lengths[len(path) - 1 + len(points) - 1 :]) / total
    return combined, (head, 1.0 - tail)


@dataclass(frozen=True)
class Corner:
    """A corner of the walk: the broken configuration shared by two edges.

    ``key`` is the boundary key of the adjacent lower step, ``through`` the
    point the lower step runs through (an index-1 point or the base).
    """

    kind: str
    tau: float
    parameter: float
    key: tuple[str, str]
    through: str

    def describe(self) -> str:
        return (
            f"{self.kind}, tau={self.tau:.9f}, s={self.parameter:.9f}, "
            f"through={self.through}, key={self.key[0]}|{self.key[1]}"
        )


@dataclass(frozen=True)
class Edge:
    """A lower step (fixed tau, one Morse step) or an upper step (fixed alpha, moving tau)."""

    kind: str
    component_id: str
    taus: tuple[float, ...]
    parameters: tuple[float, ...] = ()
    letter: int = 0
    alpha: str | None = None

    @property
    def interval(self) -> tuple[float, float]:
        return (self.taus[0], self.taus[-1])


@dataclass(frozen=True)
class WalkTranscript:
    direction: str
    base: str
    loop: np.ndarray
    corners: tuple[Corner, ...]
    edges: tuple[Edge, ...]

    @property
    def word(self) -> tuple[int, ...]:
        return tuple(e.letter for e in self.edges if e.kind == LOWER)

    @property
    def lower_edges(self) -> list[tuple[int, Edge]]:
        return [(k, e) for k, e in enumerate(self.edges) if e.kind == LOWER]

    def lines(self) -> list[str]:
        out = [f"# {self.direction} walk based at {self.base}"]
        for k, corner in enumerate(self.corners):
            out.append(f"corner {k}: {corner.describe()}")
            if k < len(self.edges):
                edge = self.edges[k]
                a, b = edge.interval
                extra = f", letter {edge.letter}" if edge.kind == LOWER else f", alpha {edge.alpha}"
                out.append(f"edge {k}: {edge.kind}, {edge.component_id}, [{a:.9f}, {b:.9f}]{extra}")
        return out

    def dump(self) -> str:
        return "\n".join(self.lines()) + "\n"


@dataclass(frozen=True)
class _LoopEnd:
    tau: float


@dataclass(frozen=True)
class _Approach:
    through: str


class CrocodileWalker:
    """Walks loops of one set of Morse data; the upward walker uses mirrored data."""

    def __init__(
        self,
        inventory: ModuliInventory,
        table: StepTable,
        settings: Settings | None = None,
        metrics: MetricsCollector | None = None,
        direction: str = DOWNWARD,
    ):
        settings = settings or Settings()
        self.inventory = inventory
        self.engine = inventory.engine
        self.data = inventory.data
        self.table = table
        self.config = settings.walk
        self.continuation = settings.continuation
        self.shooting = settings.shooting
        self.limit_dwell = settings.numerics.limit_dwell
        self.grid = settings.grid
        self.metrics = metrics
        self.direction = direction
        self.index0 = [c.id for c in inventory.index_points(0)]
        self.index1 = {c.id for c in inventory.index_points(1)}

    # Flow lines from the loop

    def _fire(self, loop: LoopPath, tau: float, s: float) -> FlowArc:
        start = self.data.state(loop(tau), 0.0, s)
        return self.engine.integrate(start, stop=(ESCAPE,), start_kind=Endpoint(SLICE_MINUS))

    def _upper_evaluator(self, loop: LoopPath, x_id: str):
        def evaluate(z: np.ndarray) -> Evaluation | None:
            arc = self._fire(loop, float(z[0]), float(z[1]))
            passage = first_passage(arc, self.index0)
            if passage is None or passage.critical_id != x_id or not passage.entry_unstable.size:
                return None
            return Evaluation(float(passage.entry_unstable[0]), None, arc)

        return evaluate

    def _corner_residual(self, loop: LoopPath, y: CriticalPoint):
        """Growing chart coordinates at y, or at the closest approach when the ball is missed."""

        def residual(z: np.ndarray) -> np.ndarray:
            arc = self._fire(loop, float(z[0]), float(z[1]))
            for passage in arc.passages_through(y.id):
                if np.isfinite(passage.t_in) and passage.entry_unstable.size >= 2:
                    return np.asarray(passage.entry_unstable[:2], dtype=float)
            k = int(np.argmin([y.distance(self.data, u) for u in arc.points]))
            return np.asarray(y.unstable_coordinates(self.data, arc.points[k])[:2], dtype=float)

        return residual

    # Upper steps

    def _approach(self, points: list[TracePoint]) -> _Approach | None:
        """A twice-broken corner ahead: the dwell at an index-1 point grows past the limit."""
        arc: FlowArc = points[-1].payload
        stop = first_passage(arc, self.index0)
        for passage in arc.passages:
            if stop is not None and passage.t_in >= stop.t_in:
                break
            if passage.critical_id not in self.index1 or not np.isfinite(passage.t_in):
                continue
            if passage.dwell <= self.limit_dwell:
                continue
            previous = [
                p for p in points[-2].payload.passages_through(passage.critical_id) if np.isfinite(p.t_in)
            ]
            if previous and np.linalg.norm(passage.entry_unstable) > np.linalg.norm(previous[0].entry_unstable):
                continue
            return _Approach(passage.critical_id)
        return None

    def _inspector(self):
        def inspect(points: list[TracePoint]):
            if len(points) < 2:
                return None
            tau = float(points[-1].z[0])
            if tau <= 0.0:
                return _LoopEnd(0.0)
            if tau >= 1.0:
                return _LoopEnd(1.0)
            return self._approach(points)

        return inspect

    def _star_beta(self, x_id: str, s: float) -> RigidArc:
        arcs = self.inventory.star_arcs.get(x_id, [])
        best = min(arcs, key=lambda a: abs(a.parameter - s), default=None)
        if best is None or abs(best.parameter - s) > _BETA_TOLERANCE:
            raise InconsistentComponentError(
                "Upper step reaches the loop end away from every star arc",
                details={"point": x_id, "s": s},
            )
        return best

    def _loop_end(self, tracer: Tracer, points: list[TracePoint], tau_end: float) -> np.ndarray:
        a, b = points[-2].z, points[-1].z
        lam = (tau_end - a[0]) / (b[0] - a[0]) if b[0] != a[0] else 1.0
        guess = a + lam * (b - a)
        guess[0] = tau_end
        corrected = tracer.correct(guess, np.array([1.0, 0.0]))
        if corrected is None:
            logger.warning("Loop end correction failed", tau=tau_end, s=float(guess[1]))
            return guess
        z = corrected[0]
        z[0] = tau_end
        return z

    def _incoming(self, points: list[TracePoint], y_id: str, x_id: str) -> RigidArc:
        """The connecting arc y -> x the broken limit follows after y."""
        arcs = self.inventory.connecting.get((y_id, x_id), [])
        if not arcs:
            raise InconsistentComponentError(
                "Corner at a point with no connecting arc", details={"through": y_id, "to": x_id}
            )
        if len(arcs) == 1:
            return arcs[0]
        for point in reversed(points):
            for passage in point.payload.passages_through(y_id):
                if passage.exit_direction is not None and np.isfinite(passage.t_out):
                    return max(arcs, key=lambda c: float(passage.exit_direction[:2] @ _unit(c.parameter)))
        raise InconsistentComponentError("Corner exit direction is undefined", details={"through": y_id})

    def _resolve_corner(
        self, loop: LoopPath, points: list[TracePoint], y_id: str, x_id: str
    ) -> tuple[np.ndarray, RigidArc]:
        """Exact twice-broken corner near the end of an upper trace, with its transversality check."""
        y = self.engine.by_id[y_id]
        residual = self._corner_residual(loop, y)
        z0 = np.array(points[-1].z, dtype=float)
        solution = root(residual, z0, method="hybr", options={"xtol": self.config.bisection_tolerance})
        z = solution.x if solution.success else z0
        if not solution.success:
            logger.warning("Corner solve did not converge", through=y_id, tau=float(z0[0]))
        margin = _margin(residual, z)
        if margin < self.config.regularity_margin:
            raise TransversalityError(
                "Loop meets a twice-broken corner non-transversally",
                tau=float(z[0]) % 1.0,
                details={"through": y_id, "margin": margin},
            )
        return z, self._incoming(points, y_id, x_id)

    def _glue(self, loop: LoopPath, corner: Corner, end: BrokenConfiguration) -> tuple[np.ndarray, np.ndarray]:
        """Seed of the upper step leaving a twice-broken corner along the arc ``end.beta``.

        Trajectories from a small circle around the corner exit y in every
        unstable direction once; the seed is the crossing of the upper
        step's zero set whose exit direction follows the outgoing arc.
        """
        outgoing = self.inventory.rigid(end.beta)
        center = np.array([corner.tau, corner.parameter])
        radius = self.config.gluing_offset

        def fire(theta: float) -> FlowArc:
            z = center + radius * _unit(theta)
            return self._fire(loop, z[0], z[1])

        shooter = AdaptiveShooter(self.data, fire, self.index0, self.shooting, periodic=True, ball=self.engine.ball)
        best: tuple[float, float] | None = None
        for a, b in shooter.transitions(shooter.sweep(0.0, TWO_PI, self.grid)):
            if a.label[0] != outgoing.target:
                continue
            theta, _ = shooter.solve(a, b)
            passages = [
                p
                for p in shooter.shot(theta).arc.passages_through(corner.through)
                if np.isfinite(p.t_in) and p.exit_direction is not None
            ]
            if not passages:
                continue
            score = float(passages[0].exit_direction[:2] @ _unit(outgoing.parameter))
            if best is None or score > best[0]:
                best = (score, theta)
        if best is None:
            raise TransversalityError(
                "Gluing at a twice-broken corner did not resolve",
                tau=corner.tau,
                details={"through": corner.through, "arc": outgoing.id},
            )
        direction = _unit(best[1])
        return center + radius * direction, direction

    def _upper(
        self, loop: LoopPath, corner: Corner, end: BrokenConfiguration, corners: int
    ) -> tuple[Edge, Corner, int]:
        x_id, alpha = end.junctions[-1], end.alpha
        tracer = Tracer(
            self._upper_evaluator(loop, x_id), self.continuation, space=f"M(gamma,{x_id})", metrics=self.metrics
        )
        if corner.kind == ONCE_BROKEN:
            seed = np.array([corner.tau, corner.parameter])
            direction = np.array([1.0 if corner.tau == 0.0 else -1.0, 0.0])
        else:
            seed, direction = self._glue(loop, corner, end)
        try:
            trace = tracer.trace(tracer.start(seed), direction, self._inspector(), f"{x_id}|{alpha}")
        except ContinuationStallError as e:
            raise TransversalityError(
                "Upper step stalled", tau=corner.tau, details={"point": x_id, "alpha": alpha, **e.details}
            ) from e
        if not trace.complete:
            raise WalkLimitError("Upper step did not reach a corner", corners=corners)

        points = list(trace.points)
        reason = trace.reason
        if isinstance(reason, _LoopEnd):
            z = self._loop_end(tracer, points, reason.tau)
            beta = self._star_beta(x_id, float(z[1]))
            through = self.data.base_label
            following = Corner(ONCE_BROKEN, reason.tau, beta.parameter, (beta.id, alpha), through)
        else:
            z, incoming = self._resolve_corner(loop, points, reason.through, x_id)
            through = reason.through
            following = Corner(TWICE_BROKEN, float(z[0]), float(z[1]), (incoming.id, alpha), through)

        letters = self.table.starting_at(following.key, through=through)
        if len(letters) != 1:
            raise InconsistentComponentError(
                "Corner is not the start of exactly one step",
                details={"key": list(following.key), "through": through, "steps": letters},
            )
        inner = points[1:-1]
        edge = Edge(
            UPPER,
            f"{x_id}|{alpha}",
            (corner.tau, *(float(p.z[0]) for p in inner), following.tau),
            (corner.parameter, *(float(p.z[1]) for p in inner), following.parameter),
            alpha=alpha,
        )
        return edge, following, letters[0]

    # Walk

    def _check_based(self, loop: LoopPath) -> None:
        base = self.data.model.normalize(self.data.base_point)
        model = self.data.model
        for position, point in (("start", loop.points[0]), ("end", loop.points[-1])):
            if model.distance(point, base) > self.config.path_tolerance:
                raise ValidationError(
                    f"Loop {position} is not the base point {self.data.base_label}",
                    field="loop",
                    details={"distance": model.distance(point, base)},
                )

    def walk(self, points: np.ndarray) -> tuple[WalkTranscript, MorseLoop]:
        """Walk the boundary component of M(gamma, M) through the zero-length trajectory."""
        loop = LoopPath.from_points(self.data.model, points)
        self._check_based(loop)
        letter = self.table.distinguished
        if letter is None:
            raise InconsistentComponentError("No component carries the zero-length trajectory")
        base = self.data.base_label
        logger.debug("Crocodile walk started", direction=self.direction, base=base, vertices=len(loop.points))

        corners = [Corner(ZERO_LENGTH_CORNER, 0.0, 0.0, self.table.root, base)]
        edges: list[Edge] = []
        tau = 0.0
        while True:
            step = self.table.step(letter)
            edges.append(Edge(LOWER, step.component.id, (tau, tau), letter=letter))
            end = step.end
            if isinstance(end, ZeroLength):
                if tau != 1.0:
                    raise InconsistentComponentError(
                        "Walk returned to the trajectory it started from", component_id=step.component.id
                    )
                corners.append(Corner(ZERO_LENGTH_CORNER, 1.0, 0.0, end.key, base))
                break
            if len(corners) >= self.config.max_corners:
                raise WalkLimitError("Corner budget exceeded", corners=len(corners))
            if tau in (0.0, 1.0) and step.through == base:
                beta = self.inventory.rigid(end.beta)
                corner = Corner(ONCE_BROKEN, tau, beta.parameter, end.key, base)
            else:
                previous = corners[-1]
                corner = Corner(TWICE_BROKEN, tau, previous.parameter, end.key, step.through)
            corners.append(corner)
            edge, following, letter = self._upper(loop, corner, end, len(corners))
            edges.append(edge)
            corners.append(following)
            tau = following.tau

        transcript = WalkTranscript(self.direction, base, loop.points, tuple(corners), tuple(edges))
        self.table.check_consecutive(transcript.word)
        word = MorseLoop(transcript.word)
        if self.metrics:
            self.metrics.record_walk(self.direction, len(corners))
        logger.info(
            "Crocodile walk finished",
            direction=self.direction,
            base=base,
            corners=len(corners),
            word=format_word(word.word),
        )
        return transcript, word


def _unit(angle: float) -> np.ndarray:
    return np.array([np.cos(angle), np.sin(angle)])


def _margin(residual, z: np.ndarray) -> float:
    """Ratio of the singular values of the corner Jacobian."""
    columns = []
    for i in range(2):
        step = np.zeros(2)
        step[i] = _FD_STEP
        columns.append((residual(z + step) - residual(z - step)) / (2.0 * _FD_STEP))
    singular = np.linalg.svd(np.column_stack(columns), compute_uv=False)
    return float(singular[-1] / singular[0]) if singular[0] > 0.0 else 0.0


def downward_walk(
    inventory: ModuliInventory,
    table: StepTable,
    points: np.ndarray,
    settings: Settings | None = None,
    metrics: MetricsCollector | None = None,
) -> tuple[WalkTranscript, MorseLoop]:
    """Theta of a loop based at the base point."""
    return CrocodileWalker(inventory, table, settings, metrics, DOWNWARD).walk(points)


def upward_walk(
    aux_inventory: ModuliInventory,
    co_table: StepTable,
    points: np.ndarray,
    settings: Settings | None = None,
    metrics: MetricsCollector | None = None,
) -> tuple[WalkTranscript, MorseLoop]:
    """Co-step word of a loop based at the aux point, walked on the mirrored data."""
    return CrocodileWalker(aux_inventory, co_table, settings, metrics, UPWARD).walk(points)

