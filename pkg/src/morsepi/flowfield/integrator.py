"""Hybrid integration of u' = -X(u).

Outside the Morse chart balls the nonlinear flow is integrated with an
embedded Runge-Kutta pair and sharp event location. Inside a ball of radius
``critical_ball`` around a critical point the flow is the linear flow of the
Morse chart, solved exactly, so long dwells near critical points cost
nothing and are measured precisely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from morsepi.config import NumericsConfig
from morsepi.exceptions import IntegrationError
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.data import StableMorseData
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector

logger = get_logger(__name__)

SLICE_PLUS = "slice+"
SLICE_MINUS = "slice-"
NEAR_CRITICAL = "critical"
ESCAPE = "escape"
INTERIOR = "interior"

FORWARD = "forward"
BACKWARD = "backward"

_ON_SLICE = 1e-13
_PRESTEP = 1e-8
_BALL_SAMPLES = 6


@dataclass(frozen=True)
class Endpoint:
    """How an arc starts or ends."""

    kind: str
    critical_id: str | None = None

    def __str__(self) -> str:
        return f"{self.kind}({self.critical_id})" if self.critical_id else self.kind


@dataclass(frozen=True)
class BallPassage:
    """Time spent in the Morse chart ball of one critical point.

    ``entry_unstable`` holds the growing chart coordinates at entry. They
    vanish exactly on the stable manifold, which makes them the natural
    functional for locating connecting trajectories.
    """

    critical_id: str
    t_in: float
    t_out: float
    entry_unstable: np.ndarray
    exit_sign: int = 0
    exited: bool = True
    exit_direction: np.ndarray | None = None

    @property
    def dwell(self) -> float:
        return self.t_out - self.t_in


@dataclass(frozen=True)
class Crossing:
    """A transversal crossing of a slice recorded without stopping."""

    kind: str
    time: float
    state: np.ndarray


@dataclass(frozen=True)
class FlowArc:
    """Samples of a solution of u' = -X(u) (or +X for backward arcs)."""

    times: np.ndarray
    points: np.ndarray
    start: Endpoint
    end: Endpoint
    passages: tuple[BallPassage, ...] = field(default_factory=tuple)
    crossings: tuple[Crossing, ...] = field(default_factory=tuple)
    direction: str = FORWARD
    converged: bool = False

    @property
    def start_point(self) -> np.ndarray:
        return self.points[0]

    @property
    def end_point(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        if self.infinite:
            return float("inf")
        return float(self.times[-1] - self.times[0])

    @property
    def infinite(self) -> bool:
        """Starts or ends at a critical point, so the time interval is unbounded."""
        return self.from_critical or self.converged

    @property
    def from_critical(self) -> bool:
        return bool(self.passages) and self.passages[0].t_in == float("-inf")

    def passages_through(self, critical_id: str) -> list[BallPassage]:
        return [p for p in self.passages if p.critical_id == critical_id]

    def last_passage(self) -> BallPassage | None:
        return self.passages[-1] if self.passages else None

    def crossings_after(self, time: float, kind: str = SLICE_PLUS) -> list[Crossing]:
        return [c for c in self.crossings if c.kind == kind and c.time > time]

    def values(self, data: StableMorseData) -> np.ndarray:
        return np.array([data.value(u) for u in self.points])

    def reversed(self) -> "FlowArc":
        """Same curve, reversed sampling order (times negated)."""
        return FlowArc(
            times=-self.times[::-1],
            points=self.points[::-1],
            start=self.end,
            end=self.start,
            passages=tuple(reversed(self.passages)),
            crossings=self.crossings,
            direction=BACKWARD if self.direction == FORWARD else FORWARD,
            converged=self.from_critical,
        )

    def csv_rows(self, data: StableMorseData) -> list[list[float]]:
        """``t, coords..., f`` rows."""
        return [[float(t), *map(float, u), data.value(u)] for t, u in zip(self.times, self.points)]


class FlowEngine:
    """Integrates the flow of -X with ball handoffs and slice events."""

    def __init__(
        self,
        data: StableMorseData,
        critical_points: Iterable[CriticalPoint],
        numerics: NumericsConfig | None = None,
        metrics: MetricsCollector | None = None,
    ):
        self.data = data
        self.critical_points = list(critical_points)
        self.by_id = {c.id: c for c in self.critical_points}
        self.numerics = numerics or NumericsConfig()
        self.metrics = metrics
        self.ball = self.numerics.critical_ball

    # Event functions

    def _slice_event(self, kind: str, terminal: bool):
        column = self.data.coord_dim + (1 if kind == SLICE_PLUS else 0)

        def event(t, u):
            return u[column]

        event.terminal = terminal
        event.direction = 0
        return event

    def _ball_event(self, point: CriticalPoint):
        def event(t, u):
            return self.data.distance(point.location, u) - self.ball

        event.terminal = True
        event.direction = -1
        return event

    def _escape_event(self):
        radius = self.numerics.escape_factor * self.data.support_radius

        def event(t, u):
            return self.data.fiber_norm(u) - radius

        event.terminal = True
        event.direction = 1
        return event

    def start_kind(self, u: np.ndarray) -> Endpoint:
        if abs(self.data.slice_plus(u)) <= _ON_SLICE:
            return Endpoint(SLICE_PLUS)
        if abs(self.data.slice_minus(u)) <= _ON_SLICE:
            return Endpoint(SLICE_MINUS)
        return Endpoint(INTERIOR)

    def inside_ball(self, u: np.ndarray) -> CriticalPoint | None:
        for point in self.critical_points:
            if self.data.distance(point.location, u) < self.ball * (1.0 - 1e-9):
                return point
        return None

    # Linear flow in a Morse chart

    def rates(self, point: CriticalPoint, sign: float) -> np.ndarray:
        """Growth rates of the eigen-coordinates along the chosen time direction."""
        return -sign * point.eigenvalues

    def linear_state(self, point: CriticalPoint, eta: np.ndarray, rates: np.ndarray, tau: float) -> np.ndarray:
        xi = point.eigenvectors @ (eta * np.exp(rates * tau))
        return point.from_chart(self.data, xi)

    def exit_time(self, eta: np.ndarray, rates: np.ndarray) -> float:
        """First positive time with |eta(tau)| = ball radius; inf if none."""
        growing = rates > 0.0
        if not np.any(np.abs(eta[growing]) > 0.0):
            return float("inf")
        r2 = self.ball**2

        def excess(tau: float) -> float:
            return float(np.sum(eta**2 * np.exp(2.0 * rates * tau)) - r2)

        upper = max(
            np.log(self.ball / abs(e)) / rate
            for e, rate in zip(eta[growing], rates[growing])
            if abs(e) > 0.0
        )
        upper = max(upper, 0.0) + 1e-12
        while excess(upper) < 0.0:
            upper = 2.0 * upper + 1e-9
        low = minimize_scalar(excess, bounds=(0.0, upper), method="bounded").x
        if excess(low) >= 0.0:
            return 0.0
        return float(brentq(excess, low, upper, xtol=self.numerics.event_tolerance))

    def _pass_ball(
        self, point: CriticalPoint, u: np.ndarray, t: float, sign: float, t_end: float
    ) -> tuple[list[tuple[float, np.ndarray]], BallPassage]:
        """Exact linear passage through a ball entered at time t."""
        eta = point.eigenvectors.T @ point.chart(self.data, u)
        rates = self.rates(point, sign)
        growing = rates > 0.0
        entry = eta[growing].copy()
        tau = self.exit_time(eta, rates)

        if not np.isfinite(tau):
            passage = BallPassage(point.id, t, float("inf"), entry, 0, exited=False)
            return [(t_end, point.location.copy())], passage

        exited = t + tau <= t_end
        span = tau if exited else t_end - t
        grid = span * (np.geomspace(1.0, 1e3 + 1.0, _BALL_SAMPLES) - 1.0) / 1e3
        samples = [(t + s, self.linear_state(point, eta, rates, s)) for s in grid[1:]]

        final = (eta * np.exp(rates * tau))[growing]
        exit_sign = int(np.sign(final[np.argmax(np.abs(final))])) if final.size else 0
        passage = BallPassage(
            point.id, t, t + span, entry, exit_sign, exited=exited, exit_direction=final / np.linalg.norm(final)
        )
        return samples, passage

    # Integration

    def integrate(
        self,
        start: np.ndarray,
        direction: str = FORWARD,
        stop: Iterable[str] = (SLICE_PLUS, ESCAPE),
        watch: Iterable[str] = (),
        horizon: float | None = None,
        start_kind: Endpoint | None = None,
        t0: float = 0.0,
        initial_passages: tuple[BallPassage, ...] = (),
        hold: Iterable[str] = (),
    ) -> FlowArc:
        """Integrate from ``start`` until the first stopping event.

        ``stop`` names the terminal events, ``watch`` the slices whose
        crossings are recorded without stopping. Ball handoffs always run;
        with ``critical`` in ``stop`` the arc ends at the first ball entry
        instead, and ``hold`` does the same for the named points only.
        Raises IntegrationError on step underflow, or when the arc leaves
        the escape radius while ``escape`` is not a stopping event.
        """
        stop = frozenset(stop)
        watch = frozenset(watch) - stop
        hold = frozenset(hold)
        sign = 1.0 if direction == FORWARD else -1.0
        t_end = t0 + (self.numerics.max_time if horizon is None else horizon)
        u = np.asarray(start, dtype=float).copy()
        start_kind = start_kind or self.start_kind(u)

        times, points = [t0], [u.copy()]
        passages = list(initial_passages)
        crossings: list[Crossing] = []

        def finish(kind: str, critical_id: str | None = None, converged: bool = False) -> FlowArc:
            if self.metrics:
                self.metrics.record_integration(kind)
            return FlowArc(
                times=np.array(times),
                points=np.array(points),
                start=start_kind,
                end=Endpoint(kind, critical_id),
                passages=tuple(passages),
                crossings=tuple(crossings),
                direction=direction,
                converged=converged,
            )

        def enter(point: CriticalPoint, v: np.ndarray, time: float) -> FlowArc | None:
            samples, passage = self._pass_ball(point, v, time, sign, t_end)
            passages.append(passage)
            for s, w in samples:
                times.append(s)
                points.append(w)
            if passage.exited:
                return None
            if np.isinf(passage.t_out):
                return finish(NEAR_CRITICAL, point.id, converged=True)
            return finish(INTERIOR)

        on_slice = {
            kind
            for kind, value in ((SLICE_PLUS, self.data.slice_plus(u)), (SLICE_MINUS, self.data.slice_minus(u)))
            if abs(value) <= _ON_SLICE
        }
        zero_length = on_slice & stop
        if zero_length and start_kind.kind != NEAR_CRITICAL:
            return finish(min(zero_length))

        t = t0
        inside = self.inside_ball(u)
        if inside is not None and not initial_passages:
            done = enter(inside, u, t)
            if done is not None:
                return done
            u, t = points[-1].copy(), times[-1]

        def rhs(_t, v):
            return -sign * self.data.vector_field(v)

        # events sitting at zero on the start point would fire at t0
        if on_slice and t < t_end:
            pre = solve_ivp(rhs, (t, min(t + _PRESTEP, t_end)), u, rtol=self.numerics.rtol, atol=self.numerics.atol)
            u, t = pre.y[:, -1].copy(), float(pre.t[-1])
            times.append(t)
            points.append(u.copy())

        while t < t_end:
            names, events = [], []
            for kind in (SLICE_PLUS, SLICE_MINUS):
                if kind in stop or kind in watch:
                    names.append(kind)
                    events.append(self._slice_event(kind, terminal=kind in stop))
            names.append(ESCAPE)
            events.append(self._escape_event())
            for point in self.critical_points:
                names.append(point.id)
                events.append(self._ball_event(point))

            sol = solve_ivp(
                rhs,
                (t, t_end),
                u,
                method="RK45",
                rtol=self.numerics.rtol,
                atol=self.numerics.atol,
                events=events,
                dense_output=True,
            )
            if sol.status == -1:
                if self.metrics:
                    self.metrics.record_integration("failed")
                raise IntegrationError(f"Integration failed: {sol.message}", reason="step-underflow")
            self._append(sol, times, points)

            for name, event_times in zip(names, sol.t_events):
                if name in watch:
                    crossings.extend(Crossing(name, float(te), sol.sol(te)) for te in event_times if te > t)
            crossings.sort(key=lambda c: c.time)

            if sol.status == 0:
                return finish(INTERIOR)

            t_hit = float(sol.t[-1])
            fired = next(
                name
                for name, event_times, event in zip(names, sol.t_events, events)
                if event.terminal and len(event_times) and abs(event_times[-1] - t_hit) <= 1e-12 * max(1.0, abs(t_hit))
            )
            t, u = t_hit, sol.y[:, -1].copy()
            if fired in (SLICE_PLUS, SLICE_MINUS):
                return finish(fired)
            if fired == ESCAPE:
                if ESCAPE in stop:
                    return finish(ESCAPE)
                raise IntegrationError("Trajectory left the escape radius", reason="escape")

            point = self.by_id[fired]
            if NEAR_CRITICAL in stop or point.id in hold:
                eta = point.eigenvectors.T @ point.chart(self.data, u)
                entry = eta[self.rates(point, sign) > 0.0].copy()
                passages.append(BallPassage(point.id, t, t, entry, 0, exited=False))
                return finish(NEAR_CRITICAL, point.id)

            done = enter(point, u, t)
            if done is not None:
                return done
            u, t = points[-1].copy(), times[-1]

        return finish(INTERIOR)

    def _append(self, sol, times: list[float], points: list[np.ndarray]) -> None:
        spacing = self.numerics.sample_spacing
        for k in range(1, len(sol.t)):
            a, b = sol.y[:, k - 1], sol.y[:, k]
            gap = float(np.linalg.norm(b - a))
            if gap > spacing:
                extra = int(np.ceil(gap / spacing))
                for s in np.linspace(sol.t[k - 1], sol.t[k], extra + 1)[1:-1]:
                    times.append(float(s))
                    points.append(sol.sol(s))
            times.append(float(sol.t[k]))
            points.append(b.copy())

    # Shots from critical points

    def shoot(
        self,
        point: CriticalPoint,
        chart_direction: np.ndarray,
        direction: str = FORWARD,
        **kwargs,
    ) -> FlowArc:
        """Trajectory leaving ``point`` along a unit chart direction.

        The segment inside the ball is the exact linear flow, so the arc
        starts on the ball boundary at time 0.
        """
        unit = np.asarray(chart_direction, dtype=float)
        unit = unit / np.linalg.norm(unit)
        start = point.from_chart(self.data, self.ball * unit)
        source = BallPassage(point.id, float("-inf"), 0.0, np.zeros(0), exited=True)
        return self.integrate(
            start,
            direction=direction,
            start_kind=Endpoint(NEAR_CRITICAL, point.id),
            initial_passages=(source,),
            **kwargs,
        )

    def flow(self, start: np.ndarray, time: float, start_kind: Endpoint | None = None, **kwargs) -> FlowArc:
        """The arc of duration ``time`` with no stopping slices."""
        return self.integrate(start, stop=kwargs.pop("stop", (ESCAPE,)), horizon=time, start_kind=start_kind, **kwargs)
