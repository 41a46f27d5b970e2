"""Observability components for morsepi."""

from morsepi.observability.logging import get_logger, setup_logging
from morsepi.observability.metrics import MetricsCollector, get_metrics_collector

__all__ = [
    "setup_logging",
    "get_logger",
    "MetricsCollector",
    "get_metrics_collector",
]
