"""Pipeline orchestrator: critical points, moduli, steps, walks, relations, verdict."""

from __future__ import annotations

import asyncio
from contextlib import asynccontextmanager
from time import perf_counter

import numpy as np

from morsepi.config import Settings
from morsepi.crocodile.functorial import base_path, builtin_map, pushed_loop, pushforward, transport_base
from morsepi.crocodile.walk import DOWNWARD, UPWARD, CrocodileWalker, conjugate_loop
from morsepi.events import (
    ComponentTracedEvent,
    CriticalPointsFoundEvent,
    EventBus,
    SimpleEventBus,
    VerdictReachedEvent,
    WalkCompletedEvent,
)
from morsepi.flowfield.critical import CriticalPoint, find_critical_points
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.regularity import RegularityReport, check_regularity, choose_aux_base_point
from morsepi.flowfield.scenario import Scenario
from morsepi.geometry.oracle import OraclePresentation, edge_path_presentation
from morsepi.geometry.triangulation import Triangulation, triangulate
from morsepi.geometry.words import format_word
from morsepi.moduli.inventory import ModuliInventory, build_inventory
from morsepi.moduli.multiplicity import multiplicities
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector
from morsepi.relations.harvest import RelationHarvester, oracle_generator_loops
from morsepi.relations.oracle_compare import compare_with_oracle
from morsepi.relations.patches import RelationContext
from morsepi.relations.presentation import build_quotient
from morsepi.report import PipelineReport, OracleWalk, PushResult
from morsepi.steps.model import MorseLoop, StepTable
from morsepi.steps.operations import (
    EV_SPACING,
    build_table,
    densify,
    ev_path,
    evaluate,
    generator_images,
    project_path,
)

logger = get_logger(__name__)


class MorsePipeline:
    """Runs one scenario through every stage; stages build on each other lazily."""

    def __init__(
        self,
        scenario: Scenario,
        data: StableMorseData,
        settings: Settings,
        event_bus: EventBus | None = None,
        metrics: MetricsCollector | None = None,
    ):
        self.scenario = scenario
        self.data = data
        self.settings = settings
        self.event_bus = event_bus or SimpleEventBus()
        self.metrics = metrics
        self.timings: dict[str, float] = {}

        self.critical_points: list[CriticalPoint] | None = None
        self.inventory: ModuliInventory | None = None
        self.aux_inventory: ModuliInventory | None = None
        self.table: StepTable | None = None
        self.co_table: StepTable | None = None
        self.tri: Triangulation | None = None
        self.oracle: OraclePresentation | None = None
        self.context: RelationContext | None = None
        self.regularity: RegularityReport | None = None

    @property
    def name(self) -> str:
        return self.scenario.name

    @asynccontextmanager
    async def _stage(self, stage: str):
        logger.info("Stage started", scenario=self.name, stage=stage)
        start = perf_counter()
        try:
            yield
        except Exception as e:
            logger.error("Stage failed", scenario=self.name, stage=stage, error=str(e), error_type=type(e).__name__)
            raise
        duration = perf_counter() - start
        self.timings[stage] = self.timings.get(stage, 0.0) + duration
        if self.metrics:
            self.metrics.record_stage(stage, duration)
        logger.info("Stage finished", scenario=self.name, stage=stage, seconds=round(duration, 3))

    def _report(self, subcommand: str) -> PipelineReport:
        return PipelineReport(
            scenario=self.name,
            subcommand=subcommand,
            euler_characteristic=self.data.model.euler_characteristic,
            critical_points=list(self.critical_points or []),
            timings=self.timings,
        )

    # Stages

    async def find_critical(self) -> list[CriticalPoint]:
        if self.critical_points is None:
            async with self._stage("critical"):
                self.critical_points = await asyncio.to_thread(
                    find_critical_points,
                    self.data,
                    self.settings.grid,
                    self.settings.numerics,
                    self.settings.retry,
                    self.metrics,
                    self.settings.seed,
                )
            indices = tuple(c.shifted_index for c in self.critical_points)
            self.event_bus.publish(CriticalPointsFoundEvent(self.name, indices))
        return self.critical_points

    async def build_moduli(self) -> ModuliInventory:
        if self.inventory is None:
            points = await self.find_critical()
            async with self._stage("moduli"):
                self.inventory = await asyncio.to_thread(
                    build_inventory, self.data, self.settings, self.metrics, points
                )
            for component in self.inventory.all_components():
                kinds = tuple(type(b).__name__ for b in component.boundary)
                self.event_bus.publish(ComponentTracedEvent(self.name, component.id, str(component.space), kinds))
        return self.inventory

    def _aux_margin(self, inventory: ModuliInventory):
        """Distance of a candidate aux point from the projected critical points and rigid ev+ images."""
        model = self.data.model
        avoid = [self.data.point(c.location) for c in inventory.critical_points]
        avoid += [a.ev_plus(self.data) for arcs in inventory.augmentations.values() for a in arcs]

        def margin(candidate: np.ndarray) -> float:
            return min((model.distance(candidate, p) for p in avoid), default=1.0)

        return margin

    async def prepare(self) -> RelationContext:
        """Aux point, mirrored data, step tables, oracle and both walkers."""
        if self.context is not None:
            return self.context
        inventory = await self.build_moduli()
        async with self._stage("prepare"):
            aux = choose_aux_base_point(self.data, self._aux_margin(inventory), self.settings.walk, self.settings.retry)
            self.data = self.data.with_base_point(self.data.base_point, aux)
            inventory.data = self.data
            mirrored = self.data.reversed()
            self.aux_inventory = await asyncio.to_thread(build_inventory, mirrored, self.settings, self.metrics)
            regularity = check_regularity(
                self.data, inventory, self.settings.walk.regularity_margin, self.aux_inventory
            )
            regularity.raise_if_irregular()
            self.regularity = regularity

            self.table = build_table(inventory.all_components(), self.data.base_label)
            self.co_table = build_table(self.aux_inventory.all_components(), mirrored.base_label, co=True)
            self.tri = triangulate(self.data.model, self.scenario.resolution, self.data.base_point)
            self.oracle = edge_path_presentation(self.tri)
            self.context = RelationContext(
                data=self.data,
                inventory=inventory,
                table=self.table,
                walker=CrocodileWalker(inventory, self.table, self.settings, self.metrics, DOWNWARD),
                up_walker=CrocodileWalker(self.aux_inventory, self.co_table, self.settings, self.metrics, UPWARD),
                tri=self.tri,
                oracle=self.oracle,
                settings=self.settings,
                metrics=self.metrics,
            )
        logger.info(
            "Walks prepared",
            scenario=self.name,
            steps=len(self.table),
            generators=len(self.table.generators),
            oracle_kind=self.oracle.kind,
        )
        return self.context

    def _walk_oracle_loop(self, label: str, points: np.ndarray) -> OracleWalk:
        ctx = self.context
        transcript, theta = ctx.walker.walk(points)
        self.event_bus.publish(
            WalkCompletedEvent(self.name, DOWNWARD, len(transcript.corners), format_word(theta.word))
        )
        return OracleWalk(
            label=label,
            transcript=transcript,
            theta=theta.word,
            loop_class=project_path(self.data.model, ctx.tri, ctx.oracle, points),
            theta_class=evaluate(theta, ctx.table, self.data, ctx.tri, ctx.oracle),
        )

    async def walk_oracle_loops(self) -> list[OracleWalk]:
        """Downward walks of one loop per oracle generator class."""
        ctx = await self.prepare()
        loops = oracle_generator_loops(self.data.model, ctx.tri, ctx.oracle)
        async with self._stage("walk"):
            walks = await asyncio.gather(
                *(asyncio.to_thread(self._walk_oracle_loop, f"oracle_{k}", points) for k, points in sorted(loops.items()))
            )
        return list(walks)

    # Subcommands

    async def critical(self) -> PipelineReport:
        await self.find_critical()
        return self._report("critical")

    async def moduli(self) -> PipelineReport:
        inventory = await self.build_moduli()
        report = self._report("moduli")
        report.inventory = inventory
        return report

    async def walk(self) -> PipelineReport:
        walks = await self.walk_oracle_loops()
        report = self._report("walk")
        report.inventory, report.aux_inventory = self.inventory, self.aux_inventory
        report.regularity = self.regularity
        report.table = self.table
        report.walks = walks
        return report

    async def pi1(self, include_type2: bool = True) -> PipelineReport:
        """The presentation L/R and its comparison with the edge-path group."""
        ctx = await self.prepare()
        walks = await self.walk_oracle_loops()
        async with self._stage("relations"):
            images = await asyncio.to_thread(generator_images, ctx.table, self.data, ctx.tri, ctx.oracle)
            harvester = RelationHarvester(ctx, images, self.event_bus, self.name)
            generator_loops = harvester.generator_loops()
            type1 = await asyncio.gather(
                *(asyncio.to_thread(harvester.type1, loop, label) for loop, label in generator_loops),
                *(asyncio.to_thread(harvester.type1, MorseLoop(p.theta), p.label) for p in walks),
            )
            relators = await asyncio.to_thread(harvester.harvest, list(type1), include_type2)
            presentation = build_quotient(harvester.labels, relators)
        async with self._stage("compare"):
            verdict = compare_with_oracle(presentation, ctx.oracle, images, [p.theta_class for p in walks])
        self.event_bus.publish(VerdictReachedEvent(self.name, verdict.passed, verdict.group))
        logger.info(
            "Fundamental group computed",
            scenario=self.name,
            relators=len(relators),
            verdict=verdict.passed,
            group=verdict.group,
        )

        report = self._report("pi1")
        report.inventory, report.aux_inventory = self.inventory, self.aux_inventory
        report.regularity = self.regularity
        report.multiplicity = multiplicities(
            self.inventory.point_components, self.inventory.star_components, ctx.oracle.kind
        )
        report.table = ctx.table
        report.walks = walks
        report.relators = relators
        report.lines_of_patches = harvester.lines
        report.presentation = presentation
        report.verdict = verdict
        report.max_relator_length = self.settings.relations.max_relator_length
        report.metrics_text = self.metrics.export() if self.metrics else ""
        return report

    async def rebased(self, base_point: np.ndarray) -> tuple[ModuliInventory, StepTable, CrocodileWalker]:
        """Inventory, step table and downward walker for the same data based elsewhere."""
        points = await self.find_critical()
        data = self.data.with_base_point(base_point)
        inventory = await asyncio.to_thread(build_inventory, data, self.settings, self.metrics, points)
        check_regularity(data, inventory, self.settings.walk.regularity_margin).raise_if_irregular()
        table = build_table(inventory.all_components(), data.base_label)
        logger.info("Rebased data prepared", scenario=self.name, base=data.base_point.tolist(), steps=len(table))
        return inventory, table, CrocodileWalker(inventory, table, self.settings, self.metrics, DOWNWARD)

    async def push(self, map_name: str = "identity", shift: np.ndarray | None = None) -> PipelineReport:
        """Push each generator loop along a builtin self-map and compare classes.

        When the map moves the base point the loop is walked in data based at
        phi(*) and transported back along a short path to *.
        """
        ctx = await self.prepare()
        model = self.data.model
        phi = builtin_map(map_name, model, model, shift=shift, base_image=self.data.base_point)
        image_base = phi(self.data.base_point)
        back = None
        inventory, table, walker = ctx.inventory, ctx.table, ctx.walker
        if model.distance(image_base, self.data.base_point) > self.settings.walk.path_tolerance:
            inventory, table, walker = await self.rebased(image_base)
            back = base_path(model, image_base, self.data.base_point)
        results = []
        async with self._stage("push"):
            for k, index in enumerate(ctx.table.generators):
                loop = ctx.table.fundamental_loop(index)
                path = densify(model, ev_path(ctx.table, self.data, loop.word), EV_SPACING / 4.0)
                mapped = pushed_loop(ctx.inventory, ctx.table, phi, loop)
                transcript, theta = await asyncio.to_thread(
                    pushforward, ctx.inventory, ctx.table, walker, phi, loop
                )
                if back is not None:
                    mapped, _ = conjugate_loop(model, mapped, back)
                    _, theta = await asyncio.to_thread(transport_base, inventory, table, ctx.walker, back, theta)
                results.append(
                    PushResult(
                        label=f"g{k + 1}",
                        map_name=map_name,
                        source_class=project_path(model, ctx.tri, ctx.oracle, path),
                        expected_class=project_path(model, ctx.tri, ctx.oracle, mapped),
                        theta=theta.word,
                        theta_class=evaluate(theta, ctx.table, self.data, ctx.tri, ctx.oracle),
                        transcript=transcript,
                    )
                )
        report = self._report("push")
        report.table = ctx.table
        report.pushes = results
        return report

    async def run(self, subcommand: str, **options) -> PipelineReport:
        handlers = {
            "critical": self.critical,
            "moduli": self.moduli,
            "walk": self.walk,
            "pi1": self.pi1,
            "push": self.push,
        }
        return await handlers[subcommand](**options)
