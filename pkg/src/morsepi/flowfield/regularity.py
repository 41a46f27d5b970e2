"""Sampled transversality margins and the choice of the aux base point."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from morsepi.config import RetryConfig, WalkConfig
from morsepi.exceptions import RegularityError
from morsepi.flowfield.data import StableMorseData
from morsepi.observability.logging import get_logger

if TYPE_CHECKING:
    from morsepi.moduli.inventory import ModuliInventory

logger = get_logger(__name__)

# Reported for conditions with nothing to sample, e.g. no shot near a point
FAR = 1.0


@dataclass(frozen=True)
class Margin:
    """One transversality condition and its sampled margin."""

    pair: str
    value: float


@dataclass(frozen=True)
class RegularityReport:
    margins: tuple[Margin, ...]
    threshold: float

    @property
    def regular(self) -> bool:
        return all(m.value > self.threshold for m in self.margins)

    @property
    def failing(self) -> list[Margin]:
        return [m for m in self.margins if m.value <= self.threshold]

    def worst(self) -> Margin | None:
        return min(self.margins, key=lambda m: m.value, default=None)

    def raise_if_irregular(self) -> None:
        if not self.regular:
            worst = self.worst()
            raise RegularityError(
                f"Transversality margin below {self.threshold:g}: {worst.pair}",
                pair=worst.pair,
                margin=worst.value,
                details={"failing": [m.pair for m in self.failing]},
            )

    def lines(self) -> list[str]:
        verdict = "regular" if self.regular else "IRREGULAR"
        out = [f"regularity: {verdict} (threshold {self.threshold:g})"]
        out += [f"  {m.pair}: {m.value:.6g}" for m in sorted(self.margins, key=lambda m: m.pair)]
        return out


def base_point_margins(inventory: "ModuliInventory", label: str) -> list[Margin]:
    """Margins of the base point against stable sets and rigid ev images."""
    data = inventory.data
    model = data.model
    base = data.base_point
    ball = inventory.engine.ball
    margins = []

    for y in inventory.index_points(1):
        hits = [
            float(np.linalg.norm(p.entry_unstable)) / ball
            for shot in inventory.star_line
            for p in shot.arc.passages_through(y.id)
        ]
        margins.append(Margin(f"{label}|W^s({y.id})", min(hits, default=FAR)))

    for x in inventory.index_points(0):
        margins.append(Margin(f"{label}|{x.id}", model.distance(base, data.point(x.location))))
        for alpha in inventory.augmentations.get(x.id, []):
            margins.append(Margin(f"{label}|ev+({alpha.id})", model.distance(base, alpha.ev_plus(data))))
    return margins


def check_regularity(
    data: StableMorseData,
    inventory: "ModuliInventory",
    threshold: float = 1e-3,
    aux_inventory: "ModuliInventory | None" = None,
) -> RegularityReport:
    """Margins for every sampled transversality condition.

    Always produces a report; callers decide whether to raise.
    """
    margins = base_point_margins(inventory, data.base_label)
    for arcs in inventory.connecting.values():
        margins.extend(Margin(f"W^u|W^s({arc.id})", arc.slope) for arc in arcs)
    for arcs in inventory.star_arcs.values():
        margins.extend(Margin(f"line|W^s({arc.id})", arc.slope) for arc in arcs)
    for component in inventory.all_components():
        for item in component.boundary:
            slope = getattr(item, "slope", None)
            if slope is not None:
                margins.append(Margin(f"limit({component.id}:{item.beta})", slope))
    if aux_inventory is not None:
        margins.extend(base_point_margins(aux_inventory, aux_inventory.data.base_label))

    report = RegularityReport(tuple(margins), threshold)
    worst = report.worst()
    logger.info(
        "Regularity checked",
        regular=report.regular,
        conditions=len(margins),
        worst=worst.pair if worst else None,
        margin=worst.value if worst else None,
    )
    return report


def aux_candidates(data: StableMorseData, offset: float, directions: int, rotation: float) -> list[np.ndarray]:
    """Points at embedded distance ``offset`` from the base point."""
    model = data.model
    basis = model.tangent_basis(data.base_point)
    out = []
    for k in range(directions):
        angle = rotation + 2.0 * np.pi * k / directions
        planar = np.array([np.cos(angle), np.sin(angle)])[: model.dim]
        if np.linalg.norm(planar) < 1e-9:
            continue
        step = basis @ (planar / np.linalg.norm(planar))
        trial = model.retract(data.base_point, 1e-3 * step)
        scale = 1e-3 * offset / model.distance(data.base_point, trial)
        out.append(model.retract(data.base_point, scale * step))
    return out


def choose_aux_base_point(
    data: StableMorseData,
    margin_of: Callable[[np.ndarray], float],
    walk: WalkConfig | None = None,
    retry: RetryConfig | None = None,
) -> np.ndarray:
    """Aux base point maximizing the smallest regularity margin.

    Each retry rotates the direction fan by a fraction of its spacing.
    Raises RegularityError when no candidate clears the margin.
    """
    walk = walk or WalkConfig()
    retry = retry or RetryConfig()
    for attempt in Retrying(
        stop=stop_after_attempt(retry.max_attempts),
        retry=retry_if_exception_type(RegularityError),
        reraise=True,
    ):
        with attempt:
            turn = (attempt.retry_state.attempt_number - 1) / retry.max_attempts
            rotation = turn * 2.0 * np.pi / walk.aux_directions
            offset = walk.aux_offset * (1.0 - 0.25 * turn)
            candidates = aux_candidates(data, offset, walk.aux_directions, rotation)
            scores = [margin_of(c) for c in candidates]
            best = int(np.argmax(scores))
            if scores[best] <= walk.regularity_margin:
                raise RegularityError(
                    "No admissible aux base point", pair="aux", margin=float(scores[best])
                )
            logger.info("Aux base point chosen", margin=float(scores[best]), attempt=attempt.retry_state.attempt_number)
            return candidates[best]
