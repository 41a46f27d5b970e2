"""Scenario files: line-oriented ``key = value`` descriptions of stable Morse data."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError, field_validator

from morsepi.exceptions import ScenarioError

_SCALAR_KEYS = {
    "manifold",
    "factors",
    "nplus",
    "nminus",
    "support_radius",
    "base_point",
    "aux_offset",
    "f_terms",
    "seed",
    "grid",
    "max_rel_len",
    "resolution",
}


class PerturbationSpec(BaseModel):
    """A bump-supported perturbation of the gradient."""

    kind: Literal["vector", "twist"] = Field(description="Constant vector or fiber rotation")
    index: int = Field(ge=0, description="Declaration index k")
    center: list[float] = Field(min_length=1, description="Center in the total space")
    radius: float = Field(gt=0, description="Support radius of the bump")
    vector: list[float] | None = Field(default=None, description="Vector of a vector bump")
    rate: float | None = Field(default=None, description="Angular rate of a twist")


class Scenario(BaseModel):
    """Parsed scenario."""

    name: str = Field(default="scenario", description="Scenario name, the file stem")
    manifold: str = Field(description="Builtin manifold name")
    factors: int = Field(default=2, ge=1, le=2, description="Factors of product-of-circles")
    nplus: int = Field(default=1, ge=0, description="Positive fiber dimension")
    nminus: int = Field(default=1, ge=0, description="Negative fiber dimension")
    support_radius: float = Field(default=3.0, gt=0, description="Radius R of the support")
    base_point: list[float] | None = Field(default=None, description="Base point in coordinates")
    aux_offset: float = Field(default=0.02, gt=0, le=0.05, description="Distance to aux point")
    f_terms: str = Field(min_length=1, description="Base function expression")
    seed: int = Field(default=0, ge=0, description="Sampling seed")
    grid: int | None = Field(default=None, ge=4, description="Shooting grid override")
    max_rel_len: int | None = Field(default=None, ge=1, description="Harvest length override")
    resolution: int = Field(default=0, ge=0, description="Oracle triangulation resolution")
    perturbations: list[PerturbationSpec] = Field(default_factory=list)

    @field_validator("manifold")
    @classmethod
    def validate_manifold(cls, v: str) -> str:
        """Normalize the manifold name."""
        return v.strip().lower()


def _floats(text: str, field: str, line: int) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise ScenarioError(f"Expected numbers: {text!r}", field=field, line=line) from e


def _perturbation(head: str, body: str, line: int) -> dict:
    kind_word, _, index = head.partition(" ")
    kind = "vector" if kind_word == "perturbation" else "twist"
    groups = [g.strip() for g in body.split(";")]
    if len(groups) != 3:
        raise ScenarioError(
            f"{kind_word} needs 'center ; radius ; {'vector' if kind == 'vector' else 'rate'}'",
            field=kind_word,
            line=line,
        )
    try:
        index_value = int(index.strip())
    except ValueError as e:
        raise ScenarioError(f"Bad {kind_word} index {index!r}", field=kind_word, line=line) from e

    spec = {
        "kind": kind,
        "index": index_value,
        "center": _floats(groups[0], kind_word, line),
        "radius": _floats(groups[1], kind_word, line)[0],
    }
    if kind == "vector":
        spec["vector"] = _floats(groups[2], kind_word, line)
    else:
        spec["rate"] = _floats(groups[2], kind_word, line)[0]
    return spec


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Parse scenario text. Raises ScenarioError with the offending line."""
    values: dict = {"name": name, "perturbations": []}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if line.startswith(("perturbation ", "twist ")):
            head, sep, body = line.partition(":")
            if not sep:
                raise ScenarioError("Missing ':' after perturbation index", line=number)
            values["perturbations"].append(_perturbation(head.strip(), body, number))
            continue

        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _SCALAR_KEYS:
            raise ScenarioError(f"Unknown scenario line: {raw.strip()!r}", field=key, line=number)
        if key in values:
            raise ScenarioError(f"Duplicate key {key}", field=key, line=number)
        values[key] = _floats(value, key, number) if key == "base_point" else value

    if "manifold" not in values or "f_terms" not in values:
        raise ScenarioError("Scenario needs 'manifold' and 'f_terms'")
    try:
        return Scenario.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"])
        raise ScenarioError(f"Invalid scenario value: {first['msg']}", field=field) from e


def load_scenario(path: Path | str) -> Scenario:
    """Read and parse a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario: {e}", details={"path": str(path)}) from e
    return parse_scenario(text, name=path.stem)
