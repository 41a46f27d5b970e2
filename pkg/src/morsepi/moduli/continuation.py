"""Pseudo-arclength continuation of the zero set of a scalar function on R^2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from morsepi.config import ContinuationConfig
from morsepi.exceptions import ContinuationStallError, IntegrationError
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector

logger = get_logger(__name__)

_FD_STEP = 1e-7
_NEWTON_ITERATIONS = 8

# Trace outcomes
STOPPED = "stopped"
EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Evaluation:
    """G(z) with an optional gradient and whatever the caller wants kept."""

    value: float
    gradient: np.ndarray | None = None
    payload: Any = None


@dataclass(frozen=True)
class TracePoint:
    z: np.ndarray
    value: float
    payload: Any = None


@dataclass(frozen=True)
class Trace:
    points: tuple[TracePoint, ...]
    outcome: str
    reason: Any = None

    @property
    def complete(self) -> bool:
        return self.outcome == STOPPED


def _default_metric(a: TracePoint, b: TracePoint) -> float:
    return float(np.linalg.norm(b.z - a.z))


class Tracer:
    """Predictor-corrector tracer for {G = 0}.

    ``evaluate`` returns None where G is undefined; the step is then halved
    like any other failed correction. ``metric`` measures the distance
    between consecutive accepted points and is capped by ``metric_cap``.
    """

    def __init__(
        self,
        evaluate: Callable[[np.ndarray], Evaluation | None],
        config: ContinuationConfig | None = None,
        metric: Callable[[TracePoint, TracePoint], float] = _default_metric,
        space: str = "",
        metrics: MetricsCollector | None = None,
    ):
        self.evaluate = evaluate
        self.config = config or ContinuationConfig()
        self.metric = metric
        self.space = space
        self.metrics = metrics

    def _evaluate(self, z: np.ndarray) -> Evaluation | None:
        try:
            ev = self.evaluate(z)
        except (IntegrationError, FloatingPointError, ValueError):
            return None
        if ev is None or not np.isfinite(ev.value):
            return None
        return ev

    def gradient(self, z: np.ndarray, ev: Evaluation) -> np.ndarray | None:
        if ev.gradient is not None:
            return np.asarray(ev.gradient, dtype=float)
        out = np.zeros(2)
        for i in range(2):
            step = np.zeros(2)
            step[i] = _FD_STEP
            plus, minus = self._evaluate(z + step), self._evaluate(z - step)
            if plus is None or minus is None:
                return None
            out[i] = (plus.value - minus.value) / (2.0 * _FD_STEP)
        return out

    def tangent(self, z: np.ndarray, ev: Evaluation, previous: np.ndarray) -> np.ndarray | None:
        grad = self.gradient(z, ev)
        if grad is None or not np.linalg.norm(grad) > 0.0:
            return None
        t = np.array([-grad[1], grad[0]]) / np.linalg.norm(grad)
        return t if t @ previous >= 0.0 else -t

    def correct(self, predicted: np.ndarray, tangent: np.ndarray) -> tuple[np.ndarray, Evaluation] | None:
        """Newton on [G(z) = 0, tangent . (z - predicted) = 0]."""
        z = predicted.copy()
        for _ in range(_NEWTON_ITERATIONS):
            ev = self._evaluate(z)
            if ev is None:
                return None
            if abs(ev.value) <= self.config.corrector_tolerance:
                return z, ev
            grad = self.gradient(z, ev)
            if grad is None:
                return None
            jacobian = np.array([grad, tangent])
            residual = np.array([ev.value, tangent @ (z - predicted)])
            try:
                dz = np.linalg.solve(jacobian, -residual)
            except np.linalg.LinAlgError:
                return None
            z = z + dz
            if np.linalg.norm(dz) <= 1e-12 * (1.0 + np.linalg.norm(z)):
                ev = self._evaluate(z)
                return (z, ev) if ev is not None else None
        return None

    def start(self, z: np.ndarray) -> TracePoint:
        """Correct a seed onto G = 0 along the gradient direction."""
        ev = self._evaluate(np.asarray(z, dtype=float))
        if ev is None:
            raise ContinuationStallError("Seed is outside the domain of G", details={"seed": list(z)})
        grad = self.gradient(z, ev)
        if grad is not None and np.linalg.norm(grad) > 0.0:
            normal = grad / np.linalg.norm(grad)
            corrected = self.correct(z, np.array([-normal[1], normal[0]]))
            if corrected is not None:
                return TracePoint(corrected[0], corrected[1].value, corrected[1].payload)
        return TracePoint(np.asarray(z, dtype=float), ev.value, ev.payload)

    def trace(
        self,
        seed: TracePoint,
        direction: np.ndarray,
        inspect: Callable[[list[TracePoint]], Any] | None = None,
        component_id: str | None = None,
    ) -> Trace:
        """Follow the zero set from ``seed`` in the given rough direction.

        ``inspect`` sees the accepted points after every step and stops the
        trace by returning anything truthy, which becomes ``Trace.reason``.
        Raises ContinuationStallError when the step underflows.
        """
        cfg = self.config
        points = [seed]
        ev = Evaluation(seed.value, None, seed.payload)
        tangent = self.tangent(seed.z, ev, np.asarray(direction, dtype=float))
        if tangent is None:
            raise ContinuationStallError("Singular seed", component_id=component_id)
        h = cfg.initial_step

        for _ in range(cfg.max_steps):
            reason = inspect(points) if inspect else None
            if reason:
                self._record(len(points))
                return Trace(tuple(points), STOPPED, reason)

            current = points[-1]
            while True:
                accepted = self.correct(current.z + h * tangent, tangent)
                if accepted is not None:
                    z, ev = accepted
                    candidate = TracePoint(z, ev.value, ev.payload)
                    if (z - current.z) @ tangent > 0.0 and self.metric(current, candidate) <= cfg.metric_cap:
                        break
                h *= 0.5
                if h < cfg.min_step:
                    self._record(len(points))
                    raise ContinuationStallError(
                        "Continuation step underflow",
                        component_id=component_id,
                        details={"space": self.space, "at": [float(v) for v in current.z]},
                    )

            next_tangent = self.tangent(candidate.z, ev, tangent)
            if next_tangent is None:
                raise ContinuationStallError("Singular point on the zero set", component_id=component_id)
            points.append(candidate)
            tangent = next_tangent
            h = min(1.5 * h, cfg.max_step)

        logger.warning("Continuation budget exhausted", space=self.space, component_id=component_id)
        self._record(len(points))
        return Trace(tuple(points), EXHAUSTED)

    def _record(self, steps: int) -> None:
        if self.metrics:
            self.metrics.record_continuation_steps(self.space, steps)
