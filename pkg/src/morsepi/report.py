"""Pipeline reports and the artifacts written for them."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from morsepi.crocodile.walk import WalkTranscript
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.regularity import RegularityReport
from morsepi.geometry.words import Word, format_word
from morsepi.moduli.inventory import ModuliInventory
from morsepi.moduli.multiplicity import MultiplicityTable
from morsepi.observability.logging import get_logger
from morsepi.relations.oracle_compare import Verdict
from morsepi.relations.patches import PatchLine
from morsepi.relations.presentation import Presentation, Relator
from morsepi.steps.model import StepTable

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REGULARITY = 2
EXIT_VERDICT = 3


@dataclass(frozen=True)
class OracleWalk:
    """A walked loop: its downward word and the oracle classes of the loop and of ev(word)."""

    label: str
    transcript: WalkTranscript
    theta: Word
    loop_class: Word
    theta_class: Word

    @property
    def consistent(self) -> bool:
        return self.loop_class == self.theta_class

    def line(self) -> str:
        mark = "ok" if self.consistent else "MISMATCH"
        return (
            f"{self.label}: theta [{format_word(self.theta)}], class [{format_word(self.loop_class)}], "
            f"ev(theta) [{format_word(self.theta_class)}] {mark}"
        )


@dataclass(frozen=True)
class PushResult:
    """A loop pushed along a map: expected image class against the class of the walked word."""

    label: str
    map_name: str
    source_class: Word
    expected_class: Word
    theta: Word
    theta_class: Word
    transcript: WalkTranscript

    @property
    def consistent(self) -> bool:
        return self.expected_class == self.theta_class

    def line(self) -> str:
        mark = "ok" if self.consistent else "MISMATCH"
        return (
            f"{self.map_name}({self.label}): source [{format_word(self.source_class)}], "
            f"expected [{format_word(self.expected_class)}], theta [{format_word(self.theta)}], "
            f"ev(theta) [{format_word(self.theta_class)}] {mark}"
        )


@dataclass
class PipelineReport:
    scenario: str
    subcommand: str
    euler_characteristic: int | None = None
    critical_points: list[CriticalPoint] = field(default_factory=list)
    inventory: ModuliInventory | None = None
    aux_inventory: ModuliInventory | None = None
    regularity: RegularityReport | None = None
    multiplicity: MultiplicityTable | None = None
    table: StepTable | None = None
    walks: list[OracleWalk] = field(default_factory=list)
    pushes: list[PushResult] = field(default_factory=list)
    relators: list[Relator] = field(default_factory=list)
    lines_of_patches: list[PatchLine] = field(default_factory=list)
    presentation: Presentation | None = None
    verdict: Verdict | None = None
    max_relator_length: int | None = None
    timings: dict[str, float] = field(default_factory=dict)
    metrics_text: str = ""

    @property
    def exit_status(self) -> int:
        if self.verdict is not None and not self.verdict.passed:
            return EXIT_VERDICT
        if any(not p.consistent for p in self.walks) or any(not p.consistent for p in self.pushes):
            return EXIT_VERDICT
        return EXIT_OK

    def _critical_lines(self) -> list[str]:
        out = ["[critical points]"]
        for c in self.critical_points:
            location = ", ".join(f"{x:.9f}" for x in c.location)
            out.append(f"{c.id}: index {c.shifted_index}, value {c.value:.10f}, at ({location})")
        alternating = sum((-1) ** c.shifted_index for c in self.critical_points)
        if self.euler_characteristic is not None:
            holds = "holds" if alternating == self.euler_characteristic else "FAILS"
            out.append(f"alternating count {alternating}, euler characteristic {self.euler_characteristic}: {holds}")
        return out

    def lines(self) -> list[str]:
        out = [f"# morsepi {self.subcommand} report for {self.scenario}", ""]
        out += self._critical_lines()
        if self.inventory is not None:
            connecting = self.inventory.connecting
            out += ["", "[moduli]"]
            for (source, target), arcs in connecting.items():
                out.append(f"connecting {source} -> {target}: {len(arcs)}")
            out.append(f"components: {len(self.inventory.all_components())}")
        if self.regularity is not None:
            out += ["", "[regularity]", *self.regularity.lines()]
        if self.multiplicity is not None:
            out += ["", "[multiplicities]", *self.multiplicity.lines()]
        if self.table is not None:
            out += ["", "[steps]"]
            for index, step in sorted(self.table.steps.items()):
                marker = " generator" if index in self.table.generators else ""
                out.append(f"{index}: {step.label}{marker}")
        if self.walks:
            out += ["", "[walks]", *(p.line() for p in self.walks)]
        if self.pushes:
            out += ["", "[pushforward]", *(p.line() for p in self.pushes)]
        if self.relators:
            out += ["", "[relators]"]
            if self.max_relator_length is not None:
                out.append(f"harvested candidate words up to length {self.max_relator_length}")
            out += [f"{r.kind}({r.source}): {format_word(r.word)}" for r in self.relators]
        if self.presentation is not None:
            out += ["", "[presentation]", *self.presentation.lines()]
        if self.verdict is not None:
            out += ["", "[oracle]", *self.verdict.lines()]
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, directory: Path) -> list[Path]:
        """Write every artifact; timing goes to its own file."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = [directory / "report.txt"]
        written[0].write_text(self.text())
        if self.presentation is not None:
            path = directory / "presentation.txt"
            path.write_text("\n".join(self.presentation.lines()) + "\n")
            csv_path = directory / "relators.csv"
            csv_path.write_text(self.presentation.relators_csv())
            written += [path, csv_path]
        if self.inventory is not None:
            self.inventory.write(directory / "components")
            written.append(directory / "components")
        if self.aux_inventory is not None:
            self.aux_inventory.write(directory / "components" / "aux")
        if self.walks or self.pushes:
            walks = directory / "walks"
            walks.mkdir(exist_ok=True)
            for walk in self.walks:
                path = walks / f"{walk.label}.txt"
                path.write_text(walk.transcript.dump() + f"theta: {format_word(walk.theta)}\n")
                written.append(path)
            for push in self.pushes:
                path = walks / f"{push.map_name}_{push.label}.txt"
                path.write_text(push.transcript.dump() + f"theta: {format_word(push.theta)}\n")
                written.append(path)
        if self.lines_of_patches:
            patches = directory / "patches"
            patches.mkdir(exist_ok=True)
            for k, line in enumerate(self.lines_of_patches):
                path = patches / f"line_{k:03d}.txt"
                path.write_text("\n".join(line.lines()) + "\n")
                written.append(path)
        # The only file with wall-clock content; the stage histogram lives in the metrics export
        timing = directory / "timing.txt"
        text = "".join(f"{stage}: {seconds:.3f}s\n" for stage, seconds in self.timings.items())
        if self.metrics_text:
            text += "\n# metrics\n" + self.metrics_text
        timing.write_text(text)
        written.append(timing)
        logger.info("Artifacts written", scenario=self.scenario, directory=str(directory), files=len(written))
        return written
