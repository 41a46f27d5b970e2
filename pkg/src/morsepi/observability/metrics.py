"""Metrics collection for morsepi runs."""

from functools import lru_cache
from typing import Any

try:
    from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest
except ImportError:
    # Fallback if prometheus_client not available
    CollectorRegistry = Counter = Histogram = generate_latest = None


class _NoOpMetric:
    """Stands in for any labelled prometheus metric."""

    def labels(self, **kwargs: Any) -> "_NoOpMetric":
        return self

    def inc(self, amount: float = 1.0) -> None:
        pass

    def observe(self, value: float) -> None:
        pass


class MetricsCollector:
    """Metrics collector using Prometheus.

    Each collector owns its registry, so several pipelines (or tests) can
    coexist in one process without duplicate-timeseries errors.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled and Counter is not None
        if self.enabled:
            self._init_metrics()
        else:
            self._init_noop_metrics()

    def _init_metrics(self) -> None:
        """Initialize Prometheus metrics."""
        self.registry = CollectorRegistry()
        self.integrations = Counter(
            "morsepi_integrations_total",
            "Flow integrations by outcome",
            ["outcome"],
            registry=self.registry,
        )
        self.newton_failures = Counter(
            "morsepi_newton_failures_total",
            "Critical point seeds discarded after Newton non-convergence",
            registry=self.registry,
        )
        self.continuation_steps = Counter(
            "morsepi_continuation_steps_total",
            "Accepted pseudo-arclength steps",
            ["space"],
            registry=self.registry,
        )
        self.walk_corners = Counter(
            "morsepi_walk_corners_total",
            "Corners visited by crocodile walks",
            ["direction"],
            registry=self.registry,
        )
        self.relators = Counter(
            "morsepi_relators_total",
            "Harvested relators by provenance",
            ["kind"],
            registry=self.registry,
        )
        self.stage_duration = Histogram(
            "morsepi_stage_duration_seconds",
            "Pipeline stage duration in seconds",
            ["stage"],
            registry=self.registry,
        )

    def _init_noop_metrics(self) -> None:
        """Initialize no-op metrics."""
        self.registry = None
        noop = _NoOpMetric()
        self.integrations = noop
        self.newton_failures = noop
        self.continuation_steps = noop
        self.walk_corners = noop
        self.relators = noop
        self.stage_duration = noop

    def record_integration(self, outcome: str) -> None:
        """Record one integrated arc and how it terminated."""
        self.integrations.labels(outcome=outcome).inc()

    def record_newton_failure(self) -> None:
        """Record a discarded Newton seed."""
        self.newton_failures.inc()

    def record_continuation_steps(self, space: str, steps: int) -> None:
        """Record accepted continuation steps for a moduli space."""
        self.continuation_steps.labels(space=space).inc(steps)

    def record_walk(self, direction: str, corners: int) -> None:
        """Record a finished walk."""
        self.walk_corners.labels(direction=direction).inc(corners)

    def record_relator(self, kind: str) -> None:
        """Record a harvested relator."""
        self.relators.labels(kind=kind).inc()

    def record_stage(self, stage: str, duration: float) -> None:
        """Record a stage duration."""
        self.stage_duration.labels(stage=stage).observe(duration)

    def export(self) -> str:
        """Render the registry in the Prometheus text format."""
        if not self.enabled:
            return ""
        return generate_latest(self.registry).decode("utf-8")


@lru_cache()
def get_metrics_collector(enabled: bool = True) -> MetricsCollector:
    """Get cached metrics collector."""
    return MetricsCollector(enabled=enabled)
