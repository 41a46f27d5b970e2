"""Configuration management."""

from morsepi.config.settings import (
    ContinuationConfig,
    NumericsConfig,
    ObservabilityConfig,
    RelationsConfig,
    RetryConfig,
    Settings,
    ShootingConfig,
    WalkConfig,
    get_settings,
)

__all__ = [
    "Settings",
    "get_settings",
    "NumericsConfig",
    "ShootingConfig",
    "ContinuationConfig",
    "WalkConfig",
    "RelationsConfig",
    "ObservabilityConfig",
    "RetryConfig",
]
