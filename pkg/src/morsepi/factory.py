"""Factory functions turning a scenario into configured morsepi components."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from morsepi.config import Settings, get_settings
from morsepi.events import SimpleEventBus
from morsepi.exceptions import ScenarioError
from morsepi.flowfield.data import Perturbation, StableMorseData
from morsepi.flowfield.scenario import Scenario, load_scenario
from morsepi.flowfield.terms import compile_term
from morsepi.geometry.manifold import ManifoldModel, ResolutionSettings, build_builtin
from morsepi.observability.logging import get_logger, setup_logging
from morsepi.observability.metrics import get_metrics_collector

logger = get_logger(__name__)


def apply_overrides(
    settings: Settings,
    scenario: Scenario,
    seed: int | None = None,
    grid: int | None = None,
    max_rel_len: int | None = None,
    output_dir: Path | str | None = None,
) -> Settings:
    """Run settings: command-line values beat scenario values beat the environment."""
    update: dict = {"seed": seed if seed is not None else scenario.seed}
    if grid is not None or scenario.grid is not None:
        update["grid"] = grid if grid is not None else scenario.grid
    if output_dir is not None:
        update["output_dir"] = Path(output_dir)
    walk = settings.walk.model_copy(update={"aux_offset": scenario.aux_offset})
    relations = settings.relations
    length = max_rel_len if max_rel_len is not None else scenario.max_rel_len
    if length is not None:
        relations = relations.model_copy(update={"max_relator_length": length})
    update.update(walk=walk, relations=relations)
    return settings.model_copy(update=update)


def create_model(scenario: Scenario, seed: int = 0) -> ManifoldModel:
    return build_builtin(scenario.manifold, ResolutionSettings(factors=scenario.factors, seed=seed))


def create_data(scenario: Scenario, settings: Settings | None = None) -> StableMorseData:
    """Stable Morse data of a scenario, checked for support and descent."""
    settings = settings or Settings()
    if scenario.nplus != 1 or scenario.nminus != 1:
        raise ScenarioError("Only one-dimensional fibers are supported", field="nplus")
    model = create_model(scenario, settings.seed)
    term = compile_term(scenario.f_terms, model.coordinate_names)
    base = model.default_base_point() if scenario.base_point is None else np.asarray(scenario.base_point)
    if len(base) != model.coord_dim:
        raise ScenarioError(
            f"base_point needs {model.coord_dim} coordinates", field="base_point", details={"given": len(base)}
        )

    state_dim = model.coord_dim + 2
    perturbations = []
    for spec in sorted(scenario.perturbations, key=lambda p: p.index):
        if len(spec.center) != state_dim or (spec.vector is not None and len(spec.vector) != state_dim):
            raise ScenarioError(
                f"Perturbation {spec.index} needs {state_dim} coordinates",
                field=f"perturbation {spec.index}",
            )
        perturbations.append(
            Perturbation(
                kind=spec.kind,
                center=np.asarray(spec.center, dtype=float),
                radius=spec.radius,
                vector=None if spec.vector is None else np.asarray(spec.vector, dtype=float),
                rate=spec.rate or 0.0,
            )
        )

    data = StableMorseData(
        model=model,
        base_term=term,
        support_radius=scenario.support_radius,
        base_point=model.normalize(base),
        perturbations=tuple(perturbations),
    )
    data.check_cutoff(seed=settings.seed)
    data.check_support()
    data.check_invariants(seed=settings.seed)
    logger.info(
        "Morse data created",
        scenario=scenario.name,
        manifold=model.name,
        perturbations=len(perturbations),
    )
    return data


def create_pipeline(
    scenario_path: Path | str,
    seed: int | None = None,
    grid: int | None = None,
    max_rel_len: int | None = None,
    output_dir: Path | str | None = None,
):
    """A fully configured pipeline for a scenario file."""
    from morsepi.pipeline import MorsePipeline

    scenario = load_scenario(scenario_path)
    settings = apply_overrides(get_settings(), scenario, seed, grid, max_rel_len, output_dir)
    setup_logging(
        log_level=settings.observability.log_level,
        log_format=settings.observability.log_format,
    )
    metrics = get_metrics_collector(enabled=settings.observability.enable_metrics)
    pipeline = MorsePipeline(
        scenario=scenario,
        data=create_data(scenario, settings),
        settings=settings,
        event_bus=SimpleEventBus(),
        metrics=metrics,
    )
    logger.info("Pipeline created", scenario=scenario.name, seed=settings.seed, grid=settings.grid)
    return pipeline
