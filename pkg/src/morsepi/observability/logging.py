"""structlog configuration for pipeline runs."""

import logging
import sys
from functools import lru_cache
from typing import Literal

import structlog
from structlog.types import Processor


def setup_logging(log_level: str = "INFO", log_format: Literal["json", "text"] = "json") -> None:
    """Route structured records to stderr, rendered as JSON lines or for the console.

    stdout stays free for report text.
    """
    renderer: Processor = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if log_format == "json"
        else structlog.dev.ConsoleRenderer()
    )
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(logging.getLevelName(log_level)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


@lru_cache()
def get_logger(name: str):
    return structlog.get_logger(name)
