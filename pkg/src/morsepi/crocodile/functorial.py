"""Pushing Morse loops forward along maps, and moving the base point."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from morsepi.crocodile.walk import CrocodileWalker, WalkTranscript, conjugate_loop
from morsepi.exceptions import RegularityError, ValidationError
from morsepi.flowfield.data import bump
from morsepi.geometry.manifold import AngleModel, ManifoldModel
from morsepi.moduli.connecting import coaugmentation_samples, index_points
from morsepi.moduli.dagger import EvCurve, hybrid_margin
from morsepi.moduli.inventory import ModuliInventory
from morsepi.observability.logging import get_logger
from morsepi.steps.model import MorseLoop, StepTable
from morsepi.steps.operations import EV_SPACING, densify, ev_path

logger = get_logger(__name__)

BUILTIN_MAPS = ("identity", "rotation", "double-cover", "constant", "projection")


@dataclass(frozen=True)
class Bump:
    """Smooth displacement ``vector * bump(|p - center|^2 / radius^2)``."""

    center: np.ndarray
    radius: float
    vector: np.ndarray


@dataclass(frozen=True)
class SmoothMap:
    """A builtin map between models, optionally perturbed by a bump."""

    name: str
    source: ManifoldModel
    target: ManifoldModel
    function: Callable[[np.ndarray], np.ndarray]
    perturbation: Bump | None = None

    def __call__(self, p: np.ndarray) -> np.ndarray:
        image = self.target.normalize(self.function(np.asarray(p, dtype=float)))
        if self.perturbation is None:
            return image
        b = self.perturbation
        rho2 = self.source.distance(p, b.center) ** 2 / b.radius**2
        weight = bump(rho2)
        if weight == 0.0:
            return image
        return self.target.retract(image, weight * self.target.project_tangent(image, b.vector))

    def path(self, points: np.ndarray) -> np.ndarray:
        return np.array([self(p) for p in points])


def builtin_map(
    name: str,
    source: ManifoldModel,
    target: ManifoldModel | None = None,
    shift: np.ndarray | None = None,
    base_image: np.ndarray | None = None,
    perturbation: Bump | None = None,
) -> SmoothMap:
    """identity, rotation by ``shift``, double-cover, constant at ``base_image``, or projection."""
    target = target or source
    if name == "identity":
        function = lambda p: p  # noqa: E731
    elif name == "rotation":
        if not isinstance(source, AngleModel) or shift is None:
            raise ValidationError("Rotations need an angle model and a shift", field="map")
        offset = np.asarray(shift, dtype=float)
        function = lambda p: p + offset  # noqa: E731
    elif name == "double-cover":
        if not isinstance(source, AngleModel) or source.coord_dim != 1:
            raise ValidationError("The double cover is defined on the circle", field="map")
        function = lambda p: 2.0 * p  # noqa: E731
    elif name == "constant":
        point = target.normalize(base_image if base_image is not None else target.default_base_point())
        function = lambda p: point  # noqa: E731
    elif name == "projection":
        if not isinstance(source, AngleModel) or source.coord_dim <= target.coord_dim:
            raise ValidationError("Projections drop trailing angles", field="map")
        k = target.coord_dim
        function = lambda p: p[:k]  # noqa: E731
    else:
        raise ValidationError(f"Unknown map {name!r}", field="map", details={"known": list(BUILTIN_MAPS)})
    return SmoothMap(name, source, target, function, perturbation)


def ev_minus_points(inventory: ModuliInventory) -> np.ndarray:
    """ev- of sampled M(M, y) over the index-1 points y."""
    points = []
    for y in index_points(inventory.engine, 1):
        points.extend(arc.ev_minus(inventory.data) for arc in coaugmentation_samples(inventory.engine, y))
    return np.array(points)


def hybrid_regularity(
    source: ModuliInventory, target: ModuliInventory, phi: SmoothMap, threshold: float
) -> float:
    """Margin between phi of the rigid ev+ points of the source and the target's ev- curves."""
    arcs = [arc for arcs in source.augmentations.values() for arc in arcs]
    left = EvCurve.from_arcs(source.data, "augmentations", arcs, end="plus")
    margin = hybrid_margin(left, ev_minus_points(target), phi, target.data.model)
    if margin < threshold:
        raise RegularityError(
            "Mapped augmentations meet the target's ev- images",
            pair=f"{phi.name}(ev+)|ev-",
            margin=margin,
        )
    return margin


def pushed_loop(source: ModuliInventory, source_table: StepTable, phi: SmoothMap, loop: MorseLoop) -> np.ndarray:
    """phi(ev(loop)) as a densified loop based at phi(*)."""
    path = densify(source.data.model, ev_path(source_table, source.data, loop.word), EV_SPACING / 4.0)
    mapped = phi.path(path)
    mapped[0] = mapped[-1] = phi(source.data.base_point)
    return mapped


def base_path(model: ManifoldModel, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Short path between two base points, sampled for conjugation."""
    return densify(model, np.array([model.normalize(start), model.normalize(end)]), EV_SPACING / 4.0)


def pushforward(
    source: ModuliInventory,
    source_table: StepTable,
    target_walker: CrocodileWalker,
    phi: SmoothMap,
    loop: MorseLoop,
) -> tuple[WalkTranscript, MorseLoop]:
    """Walk phi(ev(loop)) downward in target data based at phi(*)."""
    target = target_walker.data
    if target.model.distance(phi(source.data.base_point), target.base_point) > target_walker.config.path_tolerance:
        raise ValidationError(
            "The target data must be based at the image of the base point",
            field="map",
            details={"map": phi.name},
        )
    margin = hybrid_regularity(source, target_walker.inventory, phi, target_walker.config.regularity_margin)
    mapped = pushed_loop(source, source_table, phi, loop)
    mapped[0] = mapped[-1] = target.base_point
    logger.info("Pushing a loop forward", map=phi.name, letters=len(loop.word), margin=margin)
    return target_walker.walk(mapped)


def transport_base(
    source: ModuliInventory,
    source_table: StepTable,
    target_walker: CrocodileWalker,
    path: np.ndarray,
    loop: MorseLoop,
) -> tuple[WalkTranscript, MorseLoop]:
    """Walk path^-1 . ev(loop) . path with data based at the end of ``path``."""
    model = source.data.model
    path = np.asarray(path, dtype=float)
    tolerance = target_walker.config.path_tolerance
    if model.distance(path[0], source.data.base_point) > tolerance:
        raise ValidationError("Transport path must start at the base point", field="path")
    if model.distance(path[-1], target_walker.data.base_point) > tolerance:
        raise ValidationError("Transport path must end at the new base point", field="path")
    points = ev_path(source_table, source.data, loop.word)
    conjugated, _ = conjugate_loop(model, points, path)
    logger.info("Transporting a loop", letters=len(loop.word), path_vertices=len(path))
    return target_walker.walk(conjugated)
