"""Rigid trajectories: connecting arcs, augmentations and star arcs."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from morsepi.config import ShootingConfig
from morsepi.exceptions import DimensionError
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.integrator import (
    BACKWARD,
    ESCAPE,
    FORWARD,
    NEAR_CRITICAL,
    SLICE_MINUS,
    SLICE_PLUS,
    Endpoint,
    FlowArc,
    FlowEngine,
)
from morsepi.moduli.dimensions import expected_dimension
from morsepi.moduli.shooting import AdaptiveShooter, Shot, first_passage, truncate_to
from morsepi.moduli.types import AUGMENTATION, CONNECTING, COAUGMENTATION, STAR_POINT, RigidArc
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * np.pi


def index_points(engine: FlowEngine, index: int) -> list[CriticalPoint]:
    return [c for c in engine.critical_points if c.shifted_index == index]


def truncate_at(arc: FlowArc, time: float, state: np.ndarray, end: str) -> FlowArc:
    """The arc cut at ``time``, ending on ``state``."""
    keep = arc.times < time
    return replace(
        arc,
        times=np.append(arc.times[keep], time),
        points=np.vstack([arc.points[keep], state]),
        end=Endpoint(end),
        passages=tuple(p for p in arc.passages if p.t_in < time),
        crossings=tuple(c for c in arc.crossings if c.time < time),
        converged=False,
    )


def unstable_shooter(
    engine: FlowEngine, source: CriticalPoint, config: ShootingConfig | None = None
) -> AdaptiveShooter:
    """Forward shots over the unstable circle of an index-1 point."""

    def fire(angle: float) -> FlowArc:
        return engine.shoot(source, source.unstable_direction(angle), stop=(ESCAPE,), watch=(SLICE_PLUS,))

    targets = [c.id for c in index_points(engine, 0) if c.id != source.id]
    return AdaptiveShooter(engine.data, fire, targets, config, periodic=True, ball=engine.ball)


def stable_shooter(
    engine: FlowEngine, target: CriticalPoint, config: ShootingConfig | None = None
) -> AdaptiveShooter:
    """Backward shots over the stable circle of an index n-1 point."""
    n = engine.data.n

    def fire(angle: float) -> FlowArc:
        return engine.shoot(target, target.stable_direction(angle), direction=BACKWARD, stop=(ESCAPE,))

    targets = [c.id for c in index_points(engine, n) if c.id != target.id]
    return AdaptiveShooter(engine.data, fire, targets, config, periodic=True, ball=engine.ball)


def star_shooter(engine: FlowEngine, config: ShootingConfig | None = None) -> AdaptiveShooter:
    """Shots from the base point line {*} x {0} x R, stopped only by escape."""
    data = engine.data

    def fire(s: float) -> FlowArc:
        start = data.state(data.base_point, 0.0, s)
        return engine.integrate(start, stop=(ESCAPE,), watch=(SLICE_PLUS,), start_kind=Endpoint(SLICE_MINUS))

    targets = [c.id for c in index_points(engine, 0)]
    return AdaptiveShooter(data, fire, targets, config, periodic=False, ball=engine.ball)


def star_line(engine: FlowEngine, grid: int, config: ShootingConfig | None = None) -> tuple[AdaptiveShooter, list[Shot]]:
    config = config or ShootingConfig()
    shooter = star_shooter(engine, config)
    extent = config.line_extent * engine.data.support_radius
    return shooter, shooter.sweep(-extent, extent, grid)


def _solve_transitions(
    shooter: AdaptiveShooter, shots: list[Shot], engine: FlowEngine, wanted: str | None
) -> list[tuple[float, float, FlowArc, str]]:
    """(parameter, slope, truncated arc, target id) for every resolved transition."""
    out = []
    for a, b in shooter.transitions(shots):
        target = a.label[0]
        if wanted is not None and target != wanted:
            continue
        parameter, slope = shooter.solve(a, b)
        shot = shooter.shot(parameter)
        passage = first_passage(shot.arc, [target])
        if passage is None or first_passage(shot.arc, shooter.targets) is not passage:
            logger.warning(
                "Refinement did not converge", target=target, bracket=(a.parameter, b.parameter)
            )
            continue
        arc = truncate_to(shot.arc, passage, engine.by_id[target])
        out.append((parameter, slope, arc, target))
    return out


def enumerate_connecting(
    engine: FlowEngine,
    source: CriticalPoint,
    target: CriticalPoint,
    grid: int = 48,
    config: ShootingConfig | None = None,
    shooter: AdaptiveShooter | None = None,
) -> list[RigidArc]:
    """Rigid trajectories from ``source`` to ``target``, modulo time shift.

    Index (1, 0) pairs are shot forward over the unstable circle of the
    source, index (n, n-1) pairs backward over the stable circle of the
    target. A shooter passed in is reused with its cached shots. Raises
    DimensionError for positive dimension or other pairs.
    """
    n = engine.data.n
    dim = expected_dimension(CONNECTING, n, source.shifted_index, target.shifted_index)
    if dim < 0:
        return []
    if dim > 0:
        raise DimensionError(
            f"M({source.id},{target.id}) has dimension {dim}; only rigid arcs are enumerated",
            expected=0,
        )

    if (source.shifted_index, target.shifted_index) == (1, 0):
        shooter, wanted, backward = shooter or unstable_shooter(engine, source, config), target.id, False
    elif (source.shifted_index, target.shifted_index) == (n, n - 1):
        shooter, wanted, backward = stable_shooter(engine, target, config), source.id, True
    else:
        raise DimensionError(
            f"Connecting arcs between indices {source.shifted_index} and {target.shifted_index} "
            "are not shot",
            expected=0,
        )

    shots = shooter.sweep(0.0, TWO_PI, grid)
    arcs = []
    for k, (parameter, slope, arc, _) in enumerate(_solve_transitions(shooter, shots, engine, wanted)):
        if backward:
            arc = replace(arc.reversed(), direction=FORWARD)
        arcs.append(
            RigidArc(
                id=f"{source.id}>{target.id}#{k}",
                kind=CONNECTING,
                source=source.id,
                target=target.id,
                arc=arc,
                parameter=parameter,
                slope=slope,
            )
        )
    logger.info(
        "Connecting arcs enumerated",
        space=f"M({source.id},{target.id})",
        arcs=len(arcs),
        shots=shooter.shots_fired,
    )
    return arcs


def enumerate_augmentations(engine: FlowEngine, point: CriticalPoint) -> list[RigidArc]:
    """M(x, M) for an index-0 point.

    The constant trajectory ``x#0`` and, for each unstable branch, one arc
    per return to the slice: ``x#+k`` and ``x#-k`` end at the k-th crossing.
    """
    if point.shifted_index != 0:
        raise DimensionError(f"M({point.id},M) is not rigid", expected=0)
    data = engine.data
    constant = FlowArc(
        times=np.array([0.0]),
        points=np.array([point.location]),
        start=Endpoint(NEAR_CRITICAL, point.id),
        end=Endpoint(SLICE_PLUS),
        converged=True,
    )
    arcs = [RigidArc(f"{point.id}#0", AUGMENTATION, point.id, data.base_label, constant)]
    direction = point.unstable[:, 0]
    for sign, symbol in ((1, "+"), (-1, "-")):
        shot = engine.shoot(point, sign * direction, stop=(ESCAPE,), watch=(SLICE_PLUS,))
        returns = [c for c in shot.crossings if c.kind == SLICE_PLUS]
        for k, crossing in enumerate(returns, start=1):
            arcs.append(
                RigidArc(
                    id=f"{point.id}#{symbol}{k}",
                    kind=AUGMENTATION,
                    source=point.id,
                    target=data.base_label,
                    arc=truncate_at(shot, crossing.time, crossing.state, SLICE_PLUS),
                    sign=sign,
                    crossing=k,
                )
            )
    logger.debug("Augmentations enumerated", point=point.id, arcs=len(arcs))
    return arcs


def enumerate_star_arcs(
    engine: FlowEngine, shooter: AdaptiveShooter, shots: list[Shot]
) -> dict[str, list[RigidArc]]:
    """M(*, x) for every index-0 point, from the swept base point line."""
    label = engine.data.base_label
    out: dict[str, list[RigidArc]] = {c.id: [] for c in index_points(engine, 0)}
    for parameter, slope, arc, target in _solve_transitions(shooter, shots, engine, None):
        k = len(out[target])
        out[target].append(
            RigidArc(
                id=f"{label}>{target}#{k}",
                kind=STAR_POINT,
                source=label,
                target=target,
                arc=arc,
                parameter=parameter,
                slope=slope,
            )
        )
    logger.info("Star arcs enumerated", base=label, arcs={k: len(v) for k, v in out.items()})
    return out


def coaugmentation_samples(engine: FlowEngine, point: CriticalPoint, samples: int = 64) -> list[RigidArc]:
    """Samples of M(M, x): backward shots over the stable sphere of ``point``.

    Each arc is reversed so it runs forward from the slice x+ = 0 into the point.
    """
    stable = point.stable
    dim = stable.shape[1]
    if dim == 1:
        directions = [(0.0, stable[:, 0]), (np.pi, -stable[:, 0])]
    elif dim == 2:
        angles = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        directions = [(a, point.stable_direction(a)) for a in angles]
    else:
        k = np.arange(samples) + 0.5
        z = 1.0 - 2.0 * k / samples
        phi = np.pi * (1.0 + np.sqrt(5.0)) * k
        r = np.sqrt(1.0 - z * z)
        directions = [
            (float(i), stable[:, :3] @ np.array([r[i] * np.cos(phi[i]), r[i] * np.sin(phi[i]), z[i]]))
            for i in range(samples)
        ]

    out = []
    for index, (parameter, direction) in enumerate(directions):
        arc = engine.shoot(point, direction, direction=BACKWARD, stop=(SLICE_MINUS, ESCAPE))
        if arc.end.kind != SLICE_MINUS:
            continue
        out.append(
            RigidArc(
                id=f"{engine.data.base_label}<{point.id}#{index}",
                kind=COAUGMENTATION,
                source=engine.data.base_label,
                target=point.id,
                arc=replace(arc.reversed(), direction=FORWARD),
                parameter=float(parameter),
            )
        )
    return out
