"""Application settings and configuration."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class NumericsConfig(BaseSettings):
    """Integrator, Newton and critical point tolerances."""

    model_config = SettingsConfigDict(env_prefix="NUMERICS_")

    rtol: float = Field(default=1e-9, gt=0, description="Relative tolerance of the RK pair")
    atol: float = Field(default=1e-12, gt=0, description="Absolute tolerance of the RK pair")
    event_tolerance: float = Field(default=1e-10, gt=0, description="Event time bisection tolerance")
    min_step: float = Field(default=1e-12, gt=0, description="Step size underflow threshold")
    critical_ball: float = Field(
        default=0.01, gt=0, description="Radius of the linearized Morse chart ball"
    )
    newton_tolerance: float = Field(default=1e-10, gt=0, description="Gradient norm at a critical point")
    newton_max_iterations: int = Field(default=60, ge=1, description="Newton iteration cap")
    dedup_distance: float = Field(default=1e-5, gt=0, description="Critical point dedup distance")
    singular_floor: float = Field(
        default=1e-6, gt=0, description="Smallest admissible Hessian singular value"
    )
    broken_dwell: float = Field(
        default=50.0, gt=0, description="Dwell time in a chart ball that counts as broken"
    )
    limit_dwell: float = Field(
        default=4.0, gt=0, description="Dwell that triggers the solve for an exact broken limit"
    )
    zero_length: float = Field(default=1e-6, gt=0, description="Arc duration counted as zero length")
    max_time: float = Field(default=200.0, gt=0, description="Integration horizon")
    escape_factor: float = Field(
        default=2.0, gt=1, description="Escape radius as a multiple of the support radius"
    )
    sample_spacing: float = Field(
        default=0.02, gt=0, description="Maximal spacing of stored arc samples"
    )


class ShootingConfig(BaseSettings):
    """Adaptive shooting over unstable spheres and parameter lines."""

    model_config = SettingsConfigDict(env_prefix="SHOOTING_")

    hausdorff_tolerance: float = Field(
        default=0.25, gt=0, description="Neighbouring shots further apart than this are refined"
    )
    min_width: float = Field(default=1e-12, gt=0, description="Narrowest refined interval")
    max_shots: int = Field(default=4000, ge=8, description="Shot budget per shooting family")
    line_extent: float = Field(
        default=1.0, gt=0, description="Half-length of the base point line as a fraction of R"
    )


class ContinuationConfig(BaseSettings):
    """Pseudo-arclength continuation parameters."""

    model_config = SettingsConfigDict(env_prefix="CONTINUATION_")

    initial_step: float = Field(default=0.02, gt=0, description="Initial arclength step")
    min_step: float = Field(default=1e-10, gt=0, description="Step underflow threshold")
    max_step: float = Field(default=2.0, gt=0, description="Largest arclength step")
    metric_cap: float = Field(
        default=0.05, gt=0, description="Maximal continuation-metric distance between samples"
    )
    hausdorff_dedup: float = Field(
        default=0.02, gt=0, description="Hausdorff distance separating distinct components"
    )
    corrector_tolerance: float = Field(default=1e-10, gt=0, description="Newton corrector tolerance")
    max_steps: int = Field(default=4000, ge=10, description="Step budget per traced branch")


class WalkConfig(BaseSettings):
    """Crocodile walk parameters."""

    model_config = SettingsConfigDict(env_prefix="WALK_")

    regularity_margin: float = Field(default=1e-3, gt=0, description="Transversality margin")
    gluing_offset: float = Field(default=1e-3, gt=0, description="Offset used to resolve a gluing")
    max_corners: int = Field(default=10_000, ge=4, description="Corner budget per walk")
    aux_offset: float = Field(default=0.02, gt=0, description="Distance from base to aux base point")
    aux_directions: int = Field(default=16, ge=1, description="Directions sampled for the aux point")
    path_tolerance: float = Field(default=1e-6, gt=0, description="Base path matching tolerance")
    bisection_tolerance: float = Field(
        default=1e-11, gt=0, description="Loop-time bisection tolerance for corners"
    )
    loop_samples: int = Field(default=240, ge=8, description="Loop-time samples per walk")


class RelationsConfig(BaseSettings):
    """Relation harvesting parameters."""

    model_config = SettingsConfigDict(env_prefix="RELATIONS_")

    max_relator_length: int = Field(default=4, ge=1, description="Harvested word length bound")
    homotopy_samples: int = Field(default=9, ge=2, description="Initial homotopy subdivision")
    bifurcation_tolerance: float = Field(
        default=1e-6, gt=0, description="Isolation width of a bifurcation parameter"
    )
    degenerate_edge_tolerance: float = Field(
        default=1e-5, gt=0, description="Distance below which an open edge is artificial"
    )


class ObservabilityConfig(BaseSettings):
    """Observability configuration."""

    model_config = SettingsConfigDict(env_prefix="OBSERVABILITY_")

    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Logging level"
    )
    log_format: Literal["json", "text"] = Field(default="json", description="Log format")
    enable_metrics: bool = Field(default=True, description="Enable Prometheus metrics")


class RetryConfig(BaseSettings):
    """Retry configuration for reseeded numeric solves."""

    model_config = SettingsConfigDict(env_prefix="RETRY_")

    max_attempts: int = Field(default=3, ge=1, description="Maximum retry attempts")
    jitter: float = Field(default=1e-3, gt=0, description="Seed jitter applied on retry")


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    shooting: ShootingConfig = Field(default_factory=ShootingConfig)
    continuation: ContinuationConfig = Field(default_factory=ContinuationConfig)
    walk: WalkConfig = Field(default_factory=WalkConfig)
    relations: RelationsConfig = Field(default_factory=RelationsConfig)
    observability: ObservabilityConfig = Field(default_factory=ObservabilityConfig)
    retry: RetryConfig = Field(default_factory=RetryConfig)

    # Run-level settings, overridable from the command line
    seed: int = Field(default=0, ge=0, description="Seed for every sampling decision")
    grid: int = Field(default=48, ge=4, description="Shooting grid resolution")
    output_dir: Path = Field(default=Path("./morsepi_out"), description="Artifact directory")

    @field_validator("output_dir", mode="before")
    @classmethod
    def validate_output_dir(cls, v):
        """Ensure the artifact directory is absolute."""
        path = Path(v)
        if not path.is_absolute():
            path = Path.cwd() / path
        return path


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
