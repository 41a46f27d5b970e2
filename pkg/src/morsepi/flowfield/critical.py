"""Critical points of stable Morse data and their linear Morse charts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import root
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from morsepi.config import NumericsConfig, RetryConfig
from morsepi.exceptions import DegenerateCriticalPointError, FlowError, ScenarioError
from morsepi.flowfield.data import StableMorseData
from morsepi.observability.logging import get_logger
from morsepi.observability.metrics import MetricsCollector

logger = get_logger(__name__)

_HESSIAN_STEP = 1e-5


class _SeedMiss(Exception):
    """Newton did not converge from one seed."""


@dataclass(frozen=True)
class CriticalPoint:
    """A nondegenerate critical point with its Morse chart.

    The chart coordinates are ``xi = basis^T (u - location)``; the flow of
    -X is linear there with rates given by the Hessian eigenvalues.
    """

    id: str
    location: np.ndarray
    shifted_index: int
    value: float
    morse_index: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: np.ndarray

    @property
    def unstable(self) -> np.ndarray:
        """Unstable eigenvectors of the flow of -X, as columns."""
        return self.eigenvectors[:, self.eigenvalues < 0.0]

    @property
    def stable(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues > 0.0]

    @property
    def unstable_dim(self) -> int:
        return int(np.sum(self.eigenvalues < 0.0))

    def chart(self, data: StableMorseData, u: np.ndarray) -> np.ndarray:
        return self.basis.T @ data.difference(self.location, u)

    def from_chart(self, data: StableMorseData, xi: np.ndarray) -> np.ndarray:
        return data.displace(self.location, self.basis @ np.asarray(xi, dtype=float))

    def unstable_coordinates(self, data: StableMorseData, u: np.ndarray) -> np.ndarray:
        return self.unstable.T @ self.chart(data, u)

    def stable_coordinates(self, data: StableMorseData, u: np.ndarray) -> np.ndarray:
        return self.stable.T @ self.chart(data, u)

    def unstable_direction(self, angle: float) -> np.ndarray:
        """Unit chart vector on the unstable circle (two unstable directions)."""
        first, second = self.unstable[:, 0], self.unstable[:, 1]
        return np.cos(angle) * first + np.sin(angle) * second

    def stable_direction(self, angle: float) -> np.ndarray:
        """Unit chart vector on the stable circle (two stable directions)."""
        first, second = self.stable[:, 0], self.stable[:, 1]
        return np.cos(angle) * first + np.sin(angle) * second

    def distance(self, data: StableMorseData, u: np.ndarray) -> float:
        return data.distance(self.location, u)


def riemannian_hessian(data: StableMorseData, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric Hessian of f in an orthonormal tangent frame, and the frame."""
    basis = data.tangent_basis(u)
    columns = []
    for i in range(basis.shape[1]):
        step = _HESSIAN_STEP * basis[:, i]
        plus = data.gradient(data.displace(u, step))
        minus = data.gradient(data.displace(u, -step))
        columns.append((plus - minus) / (2.0 * _HESSIAN_STEP))
    hessian = basis.T @ np.column_stack(columns)
    return 0.5 * (hessian + hessian.T), basis


def _orient(vectors: np.ndarray, fiber_row: int) -> np.ndarray:
    """Fix eigenvector signs: positive x- component, else positive largest entry."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        column = out[:, j]
        pivot = column[fiber_row] if abs(column[fiber_row]) > 1e-8 else column[np.argmax(np.abs(column))]
        if pivot < 0.0:
            out[:, j] = -column
    return out


class CriticalPointFinder:
    """Grid-seeded Newton search for the zeros of grad f."""

    def __init__(
        self,
        data: StableMorseData,
        numerics: NumericsConfig | None = None,
        retry: RetryConfig | None = None,
        metrics: MetricsCollector | None = None,
        seed: int = 0,
    ):
        self.data = data
        self.numerics = numerics or NumericsConfig()
        self.retry = retry or RetryConfig()
        self.metrics = metrics
        self.rng = np.random.default_rng(seed)
        self.failures = 0

    def seeds(self, grid: int) -> list[np.ndarray]:
        """Base points on a grid over M times a few fiber offsets."""
        model = self.data.model
        if model.name == "sphere":
            count = max(grid * grid // 2, 8)
            k = np.arange(count) + 0.5
            z = 1.0 - 2.0 * k / count
            phi = np.pi * (1.0 + np.sqrt(5.0)) * k
            r = np.sqrt(1.0 - z * z)
            base = [np.array([r[i] * np.cos(phi[i]), r[i] * np.sin(phi[i]), z[i]]) for i in range(count)]
        else:
            axis = -np.pi + (np.arange(grid) + 0.5) * (2.0 * np.pi / grid)
            base = [np.array(p) for p in np.array(np.meshgrid(*[axis] * model.dim)).reshape(model.dim, -1).T]

        half = self.data.support_radius / 2.0
        offsets = [(half, 0.0), (-half, 0.0), (0.0, half), (0.0, -half)]
        seeds = [self.data.state(p) for p in base]
        for p in base[::4]:
            seeds.extend(self.data.state(p, xp, xm) for xp, xm in offsets)
        return seeds

    def _newton(self, seed: np.ndarray) -> np.ndarray:
        result = root(
            self.data.critical_residual,
            seed,
            method="hybr",
            options={"xtol": 1e-13, "maxfev": 50 * self.numerics.newton_max_iterations},
        )
        u = self.data.normalize_state(result.x)
        if not np.all(np.isfinite(u)) or self.data.fiber_norm(u) > self.data.support_radius:
            raise _SeedMiss()
        if np.linalg.norm(self.data.gradient(u)) >= self.numerics.newton_tolerance:
            raise _SeedMiss()
        return u

    def _solve_with_retry(self, seed: np.ndarray) -> np.ndarray | None:
        """Newton from the seed, re-seeded with jitter on failure."""
        try:
            for attempt in Retrying(
                stop=stop_after_attempt(self.retry.max_attempts),
                retry=retry_if_exception_type(_SeedMiss),
            ):
                with attempt:
                    jitter = 0.0
                    if attempt.retry_state.attempt_number > 1:
                        jitter = self.rng.normal(scale=self.retry.jitter, size=seed.shape)
                    return self._newton(seed + jitter)
        except RetryError:
            self.failures += 1
            if self.metrics:
                self.metrics.record_newton_failure()
        return None

    def classify(self, u: np.ndarray, id_: str = "") -> CriticalPoint:
        hessian, basis = riemannian_hessian(self.data, u)
        singular = np.linalg.svd(hessian, compute_uv=False)
        if singular.min() <= self.numerics.singular_floor:
            raise DegenerateCriticalPointError(
                "Degenerate critical point",
                location=[float(x) for x in u],
                details={"smallest_singular_value": float(singular.min())},
            )
        eigenvalues, eigenvectors = np.linalg.eigh(hessian)
        morse_index = int(np.sum(eigenvalues < 0.0))
        # the x- row of the tangent frame is the last one
        return CriticalPoint(
            id=id_,
            location=u,
            shifted_index=morse_index - self.data.nminus,
            value=self.data.value(u),
            morse_index=morse_index,
            eigenvalues=eigenvalues,
            eigenvectors=_orient(eigenvectors, fiber_row=basis.shape[1] - 1),
            basis=basis,
        )

    def find(self, grid: int) -> list[CriticalPoint]:
        found: list[np.ndarray] = []
        for seed in self.seeds(grid):
            u = self._solve_with_retry(seed)
            if u is None:
                continue
            if all(self.data.distance(u, v) > self.numerics.dedup_distance for v in found):
                found.append(u)

        found.sort(key=lambda u: (round(self.data.value(u), 12), tuple(np.round(u, 12))))
        prefix = "r" if self.data.mirrored else "c"
        points = [self.classify(u, f"{prefix}{i}") for i, u in enumerate(found)]
        self._check(points)
        logger.info(
            "Critical points found",
            count=len(points),
            indices=[p.shifted_index for p in points],
            discarded_seeds=self.failures,
        )
        return points

    def _check(self, points: list[CriticalPoint]) -> None:
        n = self.data.n
        for point in points:
            if not 0 <= point.shifted_index <= n:
                raise FlowError(
                    "Shifted index out of range",
                    details={"id": point.id, "shifted_index": point.shifted_index},
                )
        euler = sum((-1) ** p.shifted_index for p in points)
        if euler != self.data.model.euler_characteristic:
            raise FlowError(
                "Critical points do not add up to the Euler characteristic",
                details={"found": euler, "expected": self.data.model.euler_characteristic},
            )
        check_clearance(self.data, points, self.numerics.critical_ball)


def check_clearance(data: StableMorseData, points: list[CriticalPoint], ball: float) -> None:
    """Perturbation supports must stay away from the Morse chart balls."""
    for index, pert in enumerate(data.perturbations):
        for point in points:
            if data.distance(pert.center, point.location) <= pert.radius + ball:
                raise ScenarioError(
                    "Perturbation support meets a critical point",
                    field=f"perturbation {index}",
                    details={"critical_point": point.id},
                )


def find_critical_points(
    data: StableMorseData,
    grid: int,
    numerics: NumericsConfig | None = None,
    retry: RetryConfig | None = None,
    metrics: MetricsCollector | None = None,
    seed: int = 0,
) -> list[CriticalPoint]:
    """All critical points, deduplicated and ordered by (value, location)."""
    return CriticalPointFinder(data, numerics, retry, metrics, seed).find(grid)
