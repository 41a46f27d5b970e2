"""Adaptive shooting over one-parameter families of trajectories.

Each shot is labelled by the first target ball it enters together with
the sign of its growing chart coordinate there. Neighbouring shots with
labels (x, +) and (x, -) bracket a trajectory converging to x, which is
then located by a root solve on that coordinate. The grid is refined
where neighbouring trajectories are far apart in Hausdorff distance or
where the coordinate dips towards zero between same-label shots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import directed_hausdorff

from morsepi.config import ShootingConfig
from morsepi.flowfield.critical import CriticalPoint
from morsepi.flowfield.data import StableMorseData
from morsepi.flowfield.integrator import NEAR_CRITICAL, BallPassage, Endpoint, FlowArc
from morsepi.observability.logging import get_logger

logger = get_logger(__name__)

_CLOUD_POINTS = 160
_SLOPE_STEPS = (1e-6, 1e-8, 1e-10, 1e-12)


class _Undefined(Exception):
    """The shot never reaches the ball whose coordinate is being solved."""


@dataclass(frozen=True)
class Shot:
    parameter: float
    arc: FlowArc
    label: tuple
    cloud: np.ndarray


def first_passage(arc: FlowArc, targets: Iterable[str]) -> BallPassage | None:
    targets = set(targets)
    for passage in arc.passages:
        if passage.critical_id in targets and np.isfinite(passage.t_in):
            return passage
    return None


def truncate_to(arc: FlowArc, passage: BallPassage, point: CriticalPoint) -> FlowArc:
    """The arc up to its entry into ``point``'s ball, ending at the point itself."""
    keep = arc.times <= passage.t_in
    times = np.append(arc.times[keep], passage.t_in + 1.0)
    points = np.vstack([arc.points[keep], point.location])
    passages = tuple(p for p in arc.passages if p.t_in < passage.t_in) + (
        replace(passage, t_out=float("inf"), exited=False),
    )
    return replace(
        arc,
        times=times,
        points=points,
        end=Endpoint(NEAR_CRITICAL, point.id),
        passages=passages,
        crossings=tuple(c for c in arc.crossings if c.time < passage.t_in),
        converged=True,
    )


class AdaptiveShooter:
    """Refining sweep of ``fire(parameter)`` over an interval or a circle."""

    def __init__(
        self,
        data: StableMorseData,
        fire: Callable[[float], FlowArc],
        targets: Iterable[str],
        config: ShootingConfig | None = None,
        periodic: bool = False,
        ball: float = 0.01,
    ):
        self.data = data
        self.fire = fire
        self.targets = set(targets)
        self.config = config or ShootingConfig()
        self.periodic = periodic
        self.ball = ball
        self._cache: dict[float, Shot] = {}

    @property
    def shots_fired(self) -> int:
        return len(self._cache)

    def _key(self, parameter: float) -> float:
        if self.periodic:
            parameter = parameter % (2.0 * np.pi)
        return round(parameter, 15)

    def label(self, arc: FlowArc) -> tuple:
        passage = first_passage(arc, self.targets)
        if passage is not None:
            sign = int(np.sign(passage.entry_unstable[0])) if passage.entry_unstable.size else 0
            return (passage.critical_id, sign)
        _, xp, xm = self.data.split(arc.end_point)
        return (arc.end.kind, int(np.sign(xp)), int(np.sign(xm)))

    def shot(self, parameter: float) -> Shot:
        key = self._key(parameter)
        if key not in self._cache:
            arc = self.fire(key)
            cloud = np.array([self.data.embed_state(u) for u in arc.points])
            if len(cloud) > _CLOUD_POINTS:
                cloud = cloud[np.linspace(0, len(cloud) - 1, _CLOUD_POINTS).astype(int)]
            self._cache[key] = Shot(key, arc, self.label(arc), cloud)
        return self._cache[key]

    def coordinate(self, shot: Shot) -> float | None:
        """Growing chart coordinate at the labelled ball, if any."""
        passage = first_passage(shot.arc, self.targets)
        if passage is None or passage.critical_id != shot.label[0] or not passage.entry_unstable.size:
            return None
        return float(passage.entry_unstable[0])

    @staticmethod
    def _opposite(a: tuple, b: tuple) -> bool:
        return len(a) == 2 and len(b) == 2 and a[0] == b[0] and a[1] == -b[1] and a[1] != 0

    @staticmethod
    def _exact(label: tuple) -> bool:
        """A shot landing exactly on the stable manifold of its target."""
        return len(label) == 2 and label[1] == 0

    def _resolved(self, a: tuple, b: tuple) -> bool:
        if self._opposite(a, b):
            return True
        return len(a) == 2 and len(b) == 2 and a[0] == b[0] and (self._exact(a) or self._exact(b))

    def _gap(self, a: Shot, b: Shot) -> float:
        return max(directed_hausdorff(a.cloud, b.cloud)[0], directed_hausdorff(b.cloud, a.cloud)[0])

    def _dip(self, a: Shot, m: Shot, b: Shot) -> bool:
        """Whether a parabola through three same-label coordinates changes sign."""
        values = [self.coordinate(s) for s in (a, m, b)]
        if any(v is None for v in values):
            return False
        xs = np.array([a.parameter, m.parameter, b.parameter])
        ys = np.array(values)
        if abs(ys[1]) >= min(abs(ys[0]), abs(ys[2])):
            return False
        curvature, slope, _ = np.polyfit(xs - xs[1], ys, 2)
        if curvature == 0.0:
            return False
        vertex = -slope / (2.0 * curvature)
        bottom = np.polyval([curvature, slope, ys[1]], vertex) if abs(vertex) < xs[2] - xs[0] else ys[1]
        return np.sign(bottom) != np.sign(ys[1])

    def sweep(self, lo: float, hi: float, grid: int) -> list[Shot]:
        """Shots on a grid, refined until neighbours are resolved."""
        params = list(np.linspace(lo, hi, grid, endpoint=not self.periodic))
        shots = [self.shot(p) for p in params]
        pairs = [(params[i], params[i + 1]) for i in range(len(params) - 1)]
        if self.periodic:
            pairs.append((params[-1], params[0] + 2.0 * np.pi))

        refined = True
        while refined and self.shots_fired < self.config.max_shots:
            refined = False
            ordered = sorted(pairs)
            next_pairs = []
            for index, (a, b) in enumerate(ordered):
                sa, sb = self.shot(a), self.shot(b)
                width = b - a
                split = False
                if width > self.config.min_width and self.shots_fired < self.config.max_shots:
                    if sa.label != sb.label:
                        split = not self._resolved(sa.label, sb.label)
                    elif self._gap(sa, sb) > self.config.hausdorff_tolerance:
                        split = True
                    else:
                        split = self._dip_around(ordered, index)
                if split:
                    mid = 0.5 * (a + b)
                    self.shot(mid)
                    next_pairs += [(a, mid), (mid, b)]
                    refined = True
                else:
                    next_pairs.append((a, b))
            pairs = next_pairs

        if self.shots_fired >= self.config.max_shots:
            logger.warning("Shot budget exhausted", shots=self.shots_fired)
        return sorted(self._cache.values(), key=lambda s: s.parameter)

    def _dip_around(self, pairs: list[tuple[float, float]], index: int) -> bool:
        a, b = pairs[index]
        sa, sb = self.shot(a), self.shot(b)
        for neighbour in (index - 1, index + 1):
            if 0 <= neighbour < len(pairs):
                c, d = pairs[neighbour]
                other = self.shot(c if neighbour < index else d)
                if other.label == sa.label:
                    trio = sorted([sa, sb, other], key=lambda s: s.parameter)
                    if self._dip(*trio):
                        return True
        return False

    def transitions(self, shots: list[Shot]) -> list[tuple[Shot, Shot]]:
        """Adjacent shots with opposite labels at the same target.

        An exact hit is its own transition and comes paired with itself.
        """
        out = [(s, s) for s in shots if self._exact(s.label)]
        pairs = list(zip(shots, shots[1:]))
        if self.periodic and len(shots) > 1:
            pairs.append((shots[-1], shots[0]))
        for a, b in pairs:
            if self._opposite(a.label, b.label):
                out.append((a, b))
        return sorted(out, key=lambda pair: pair[0].parameter)

    def _value(self, parameter: float, target: str) -> float:
        shot = self.shot(parameter)
        passage = first_passage(shot.arc, self.targets)
        if passage is None or passage.critical_id != target or not passage.entry_unstable.size:
            raise _Undefined()
        return float(passage.entry_unstable[0])

    def solve(self, a: Shot, b: Shot) -> tuple[float, float]:
        """Root of the target coordinate between two bracketing shots, and its slope.

        An exact hit passed as both shots is its own root.
        """
        target = a.label[0]
        lo, hi = a.parameter, b.parameter
        if a is b:
            root = lo
        else:
            if hi < lo:
                hi += 2.0 * np.pi
            try:
                root = brentq(lambda p: self._value(p, target), lo, hi, xtol=self.config.min_width)
            except _Undefined:
                root = self._bisect(lo, hi, a.label)
        return float(self._key(root)), self._slope(root, target)

    def _slope(self, root: float, target: str) -> float:
        """Transversality slope at a root, with the step shrunk until both sides reach the target."""
        for step in _SLOPE_STEPS:
            try:
                high, low = self._value(root + step, target), self._value(root - step, target)
            except _Undefined:
                continue
            return abs(high - low) / (2.0 * step * self.ball)
        return 0.0

    def _bisect(self, lo: float, hi: float, low_label: tuple) -> float:
        while hi - lo > self.config.min_width:
            mid = 0.5 * (lo + hi)
            if self.shot(mid).label == low_label:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def crossings(self, shots: list[Shot]) -> list[tuple[float, float]]:
        """(parameter, time) of every recorded slice crossing."""
        return [(s.parameter, c.time) for s in shots for c in s.arc.crossings]
