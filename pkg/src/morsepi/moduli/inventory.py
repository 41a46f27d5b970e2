"""Everything enumerated for one set of Morse data, with dumps."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from morsepi.config import Settings
from morsepi.exceptions import ContinuationStallError, DimensionError, InconsistentComponentError
from morsepi.flowfield.critical import CriticalPoint, find_critical_points
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import FlowEngine
from morsepi.moduli.components import ComponentEnumerator
from morsepi.moduli.connecting import (
    TWO_PI,
    enumerate_augmentations,
    enumerate_connecting,
    enumerate_star_arcs,
    index_points,
    star_line,
    unstable_shooter,
)
from morsepi.moduli.dimensions import boundary_violations, expected_dimension
from morsepi.moduli.shooting import AdaptiveShooter, Shot
from morsepi.moduli.types import AUGMENTATION, STAR, BrokenConfiguration, ModuliComponent, RigidArc, SpaceTag
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector

logger = get_logger(__name__)

# Linear chart flow matches f only to third order in the ball radius
_F_SLACK = 1e-6


@dataclass
class ModuliInventory:
    data: StableMorseData
    engine: FlowEngine
    enumerator: ComponentEnumerator
    augmentations: dict[str, list[RigidArc]] = field(default_factory=dict)
    connecting: dict[tuple[str, str], list[RigidArc]] = field(default_factory=dict)
    star_arcs: dict[str, list[RigidArc]] = field(default_factory=dict)
    unstable_sweeps: dict[str, list[Shot]] = field(default_factory=dict)
    star_line: list[Shot] = field(default_factory=list)
    star_shooter: AdaptiveShooter | None = None
    point_components: dict[str, list[ModuliComponent]] = field(default_factory=dict)
    star_components: list[ModuliComponent] = field(default_factory=list)

    @property
    def critical_points(self) -> list[CriticalPoint]:
        return self.engine.critical_points

    def index_points(self, index: int) -> list[CriticalPoint]:
        return index_points(self.engine, index)

    def index_of(self) -> dict[str, int]:
        return {c.id: c.shifted_index for c in self.critical_points}

    def all_components(self) -> list[ModuliComponent]:
        out = list(self.star_components)
        for components in self.point_components.values():
            out.extend(components)
        return out

    def component(self, component_id: str) -> ModuliComponent:
        for component in self.all_components():
            if component.id == component_id:
                return component
        raise KeyError(component_id)

    @property
    def distinguished(self) -> ModuliComponent:
        return next(c for c in self.star_components if c.distinguished)

    def rigid(self, arc_id: str) -> RigidArc:
        """Any enumerated rigid arc by id."""
        for family in (self.augmentations, self.star_arcs):
            for arcs in family.values():
                for arc in arcs:
                    if arc.id == arc_id:
                        return arc
        for arcs in self.connecting.values():
            for arc in arcs:
                if arc.id == arc_id:
                    return arc
        raise KeyError(arc_id)

    def validate(self) -> None:
        """Abort on incomplete traces or illegal boundary strata."""
        index_of = self.index_of()
        for component in self.all_components():
            if not component.complete:
                raise ContinuationStallError(
                    "Component trace is incomplete", component_id=component.id
                )
            problems = boundary_violations(component, index_of)
            for item in component.boundary:
                if isinstance(item, BrokenConfiguration):
                    problems += _leg_violations(self.data, component.id, item)
            if problems:
                raise InconsistentComponentError(
                    "Illegal boundary", component_id=component.id, details={"problems": problems}
                )

    # Dumps

    def manifest(self) -> str:
        """Plain-text boundary classification of every component."""
        entry = {
            "base": self.data.base_label,
            "critical_points": [
                {"id": c.id, "index": c.shifted_index, "value": round(float(c.value), 10)}
                for c in self.critical_points
            ],
            "connecting": {f"{s}>{t}": [a.id for a in arcs] for (s, t), arcs in self.connecting.items()},
            "augmentations": {x: [a.id for a in arcs] for x, arcs in self.augmentations.items()},
            "star_arcs": {x: [a.id for a in arcs] for x, arcs in self.star_arcs.items()},
            "components": [
                {
                    "id": c.id,
                    "space": str(c.space),
                    "samples": len(c.samples),
                    "boundary": [str(b) for b in c.boundary],
                    "orientation": c.orientation,
                    "distinguished": c.distinguished,
                }
                for c in self.all_components()
            ],
        }
        return yaml.safe_dump(entry, sort_keys=False)

    def write(self, directory: Path) -> None:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "manifest.yaml").write_text(self.manifest())
        for component in self.all_components():
            name = component.id.replace("(", "_").replace(")", "").replace("#", "_")
            with open(directory / f"{name}.csv", "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(["sample_index", "param0", "param1", *self.data.model.coordinate_names, "xp", "xm"])
                for k, sample in enumerate(component.samples):
                    writer.writerow([k, *map(float, sample.parameter), *map(float, sample.end)])


def _leg_violations(data: StableMorseData, component_id: str, item: BrokenConfiguration) -> list[str]:
    """f must decrease strictly along and across the legs."""
    problems = []
    previous = None
    for leg in item.legs:
        values = leg.values(data)
        if len(values) > 1 and np.any(np.diff(values) > _F_SLACK):
            problems.append(f"{component_id}: f increases along a leg of {item}")
        if previous is not None and values[0] > previous + _F_SLACK:
            problems.append(f"{component_id}: f increases across a junction of {item}")
        previous = values[-1]
    return problems


def enumerate_component_space(inventory: ModuliInventory, tag: SpaceTag) -> list[ModuliComponent]:
    """Trace the one-dimensional space named by ``tag``."""
    n = inventory.data.n
    if tag.kind == AUGMENTATION:
        y = inventory.engine.by_id[tag.source]
        if expected_dimension(AUGMENTATION, n, y.shifted_index) != 1:
            raise DimensionError(f"{tag} is not one-dimensional", expected=1)
        return inventory.enumerator.trace_point_space(y, inventory.unstable_sweeps.get(y.id, []))
    if tag.kind == STAR:
        return inventory.enumerator.trace_star_space(inventory.star_line)
    raise DimensionError(f"{tag} is not traced", expected=1)


def build_inventory(
    data: StableMorseData,
    settings: Settings | None = None,
    metrics: MetricsCollector | None = None,
    critical_points: list[CriticalPoint] | None = None,
) -> ModuliInventory:
    """Critical points, rigid arcs and traced components for one set of data."""
    settings = settings or Settings()
    if critical_points is None:
        critical_points = find_critical_points(
            data, settings.grid, settings.numerics, settings.retry, metrics, settings.seed
        )
    engine = FlowEngine(data, critical_points, settings.numerics, metrics)
    n = data.n

    augmentations = {x.id: enumerate_augmentations(engine, x) for x in index_points(engine, 0)}

    connecting: dict[tuple[str, str], list[RigidArc]] = {}
    sweeps: dict[str, list[Shot]] = {}
    for y in index_points(engine, 1):
        shooter = unstable_shooter(engine, y, settings.shooting)
        for x in index_points(engine, 0):
            connecting[(y.id, x.id)] = enumerate_connecting(
                engine, y, x, settings.grid, settings.shooting, shooter=shooter
            )
        sweeps[y.id] = shooter.sweep(0.0, TWO_PI, settings.grid)
    if n >= 2:
        for a in index_points(engine, n):
            for b in index_points(engine, n - 1):
                connecting[(a.id, b.id)] = enumerate_connecting(engine, a, b, settings.grid, settings.shooting)

    shooter, shots = star_line(engine, settings.grid, settings.shooting)
    star_arcs = enumerate_star_arcs(engine, shooter, shots)

    enumerator = ComponentEnumerator(
        engine, augmentations, connecting, star_arcs, settings.numerics, settings.continuation, metrics
    )
    inventory = ModuliInventory(
        data=data,
        engine=engine,
        enumerator=enumerator,
        augmentations=augmentations,
        connecting=connecting,
        star_arcs=star_arcs,
        unstable_sweeps=sweeps,
        star_line=shots,
        star_shooter=shooter,
    )
    for y in index_points(engine, 1):
        inventory.point_components[y.id] = enumerate_component_space(inventory, SpaceTag(AUGMENTATION, y.id))
    inventory.star_components = enumerate_component_space(inventory, SpaceTag(STAR, data.base_label))
    inventory.validate()
    logger.info(
        "Moduli inventory built",
        base=data.base_label,
        critical_points=len(critical_points),
        connecting=sum(len(v) for v in connecting.values()),
        components=len(inventory.all_components()),
    )
    return inventory
