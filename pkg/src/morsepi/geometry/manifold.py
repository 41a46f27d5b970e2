"""Builtin closed manifolds with charts, metric and embedding.

Points are stored in a model-specific coordinate representation:
angles for the circle and the tori, unit vectors of R^3 for the sphere.
Dynamics run in these coordinates; the embedding is only used for
distances, plotting and the simplicial oracle.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import BaseModel, Field

from morsepi.exceptions import ManifoldError

BUILTIN_NAMES = ("circle", "torus", "sphere", "product-of-circles")

TWO_PI = 2.0 * np.pi


def wrap_angle(theta: np.ndarray | float) -> np.ndarray:
    """Map angles to [-pi, pi)."""
    return (np.asarray(theta, dtype=float) + np.pi) % TWO_PI - np.pi


class ResolutionSettings(BaseModel):
    """Sampling resolution used when validating a model."""

    samples: int = Field(default=64, description="Points sampled for atlas and metric checks")
    factors: int = Field(default=2, description="Circle factors for product-of-circles")
    seed: int = Field(default=0, ge=0, description="Sampling seed")


@dataclass(frozen=True)
class Chart:
    """A coordinate patch of a model."""

    name: str
    to_local: Callable[[np.ndarray], np.ndarray]
    from_local: Callable[[np.ndarray], np.ndarray]
    contains: Callable[[np.ndarray], bool]


class ManifoldModel(ABC):
    """A closed manifold M together with its atlas, metric and embedding."""

    name: str
    dim: int
    coord_dim: int
    euler_characteristic: int
    coordinate_names: tuple[str, ...]

    def __init__(self) -> None:
        self.charts: tuple[Chart, ...] = self._build_charts()

    @abstractmethod
    def _build_charts(self) -> tuple[Chart, ...]:
        """Return the atlas."""

    @abstractmethod
    def normalize(self, p: np.ndarray) -> np.ndarray:
        """Return the canonical coordinates of a point."""

    @abstractmethod
    def embed(self, p: np.ndarray) -> np.ndarray:
        """Map a point into Euclidean space."""

    @abstractmethod
    def unembed(self, e: np.ndarray) -> np.ndarray:
        """Coordinates of an embedded point."""

    @abstractmethod
    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        """Orthonormal basis of the tangent space, shape (coord_dim, dim)."""

    @abstractmethod
    def difference(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Tangent-ish displacement from p to q in coordinates."""

    @abstractmethod
    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform-ish random point."""

    @abstractmethod
    def default_base_point(self) -> np.ndarray:
        """Base point used when a scenario does not name one."""

    def project_tangent(self, p: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Project a coordinate vector onto the tangent space at p."""
        basis = self.tangent_basis(p)
        return basis @ (basis.T @ w)

    def retract(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Move from p along a tangent vector v."""
        return self.normalize(np.asarray(p, dtype=float) + v)

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        """Intrinsic distance: the length of the short displacement from p to q."""
        return float(np.linalg.norm(self.difference(p, q)))

    def geodesic(self, p: np.ndarray, q: np.ndarray, t: float) -> np.ndarray:
        """Point at parameter t on the short path from p to q."""
        return self.retract(p, t * self.difference(p, q))

    def lift(self, points: np.ndarray) -> np.ndarray:
        """Continuous lift of a sampled path to the coordinate cover."""
        return np.asarray(points, dtype=float)

    def descend(self, points: np.ndarray) -> np.ndarray:
        """Inverse of lift: normalize every point."""
        return np.array([self.normalize(p) for p in np.atleast_2d(points)])

    def metric(self, chart: Chart, z: np.ndarray, h: float = 1e-6) -> np.ndarray:
        """Pullback of the model metric to chart coordinates."""
        z = np.asarray(z, dtype=float)
        p0 = chart.from_local(z)
        basis = self.tangent_basis(p0)
        jac = np.empty((self.dim, self.dim))
        for k in range(self.dim):
            dz = np.zeros(self.dim)
            dz[k] = h
            forward = self.difference(p0, chart.from_local(z + dz))
            backward = self.difference(p0, chart.from_local(z - dz))
            jac[:, k] = basis.T @ (forward - backward) / (2.0 * h)
        return jac.T @ jac

    def chart_at(self, p: np.ndarray) -> Chart:
        """First chart whose domain contains p."""
        for chart in self.charts:
            if chart.contains(p):
                return chart
        raise ManifoldError("Point lies in no chart", name=self.name, details={"point": list(p)})

    def validate(self, samples: int = 64, seed: int = 0, tolerance: float = 1e-9) -> None:
        """Check transition maps and metric positivity at sampled points."""
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            p = self.random_point(rng)
            owners = [chart for chart in self.charts if chart.contains(p)]
            if not owners:
                raise ManifoldError("Atlas does not cover the model", name=self.name)
            for first in owners:
                z = first.to_local(p)
                back = first.from_local(z)
                if self.distance(back, p) > tolerance:
                    raise ManifoldError(
                        f"Chart {first.name} is not invertible", name=self.name
                    )
                for second in owners:
                    # transition second∘first⁻¹ followed by its inverse
                    w = second.to_local(first.from_local(z))
                    z_back = first.to_local(second.from_local(w))
                    if np.max(np.abs(self.difference(first.from_local(z_back), p))) > tolerance:
                        raise ManifoldError(
                            f"Transition {first.name}->{second.name} is not inverse",
                            name=self.name,
                        )
                g = self.metric(first, z)
                if np.max(np.abs(g - g.T)) > 1e-6 or np.min(np.linalg.eigvalsh(g)) <= 0.0:
                    raise ManifoldError(
                        f"Metric not positive definite in chart {first.name}", name=self.name
                    )


def _angle_charts(prefix: str, width: float = 0.1) -> tuple[Chart, Chart]:
    """Two overlapping angle charts on one circle factor."""

    def make(center: float, label: str) -> Chart:
        return Chart(
            name=f"{prefix}{label}",
            to_local=lambda p, c=center: np.atleast_1d(wrap_angle(p - c) + c),
            from_local=lambda z: wrap_angle(np.atleast_1d(z)),
            contains=lambda p, c=center: bool(np.all(np.abs(wrap_angle(p - c)) < np.pi - width)),
        )

    return make(0.0, "west"), make(np.pi, "east")


class AngleModel(ManifoldModel):
    """Flat products of circles in angle coordinates."""

    def normalize(self, p: np.ndarray) -> np.ndarray:
        return wrap_angle(np.atleast_1d(np.asarray(p, dtype=float)))

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        return np.eye(self.coord_dim)

    def difference(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        return wrap_angle(np.asarray(q, dtype=float) - np.asarray(p, dtype=float))

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-np.pi, np.pi, size=self.coord_dim)

    def default_base_point(self) -> np.ndarray:
        return np.full(self.coord_dim, 0.5)

    def lift(self, points: np.ndarray) -> np.ndarray:
        return np.unwrap(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)

    def _product_charts(self) -> tuple[Chart, ...]:
        factors = [_angle_charts(f"theta{k + 1}-") for k in range(self.coord_dim)]
        charts: list[Chart] = []
        for choice in np.ndindex(*(2,) * self.coord_dim):
            parts = [factors[k][c] for k, c in enumerate(choice)]
            charts.append(
                Chart(
                    name="*".join(part.name for part in parts),
                    to_local=lambda p, parts=parts: np.array(
                        [part.to_local(np.atleast_1d(p)[k])[0] for k, part in enumerate(parts)]
                    ),
                    from_local=lambda z: wrap_angle(np.atleast_1d(z)),
                    contains=lambda p, parts=parts: all(
                        part.contains(np.atleast_1d(p)[k]) for k, part in enumerate(parts)
                    ),
                )
            )
        return tuple(charts)


class CircleModel(AngleModel):
    name = "circle"
    dim = 1
    coord_dim = 1
    euler_characteristic = 0
    coordinate_names = ("theta",)

    def _build_charts(self) -> tuple[Chart, ...]:
        return _angle_charts("theta-")

    def embed(self, p: np.ndarray) -> np.ndarray:
        theta = float(np.atleast_1d(p)[0])
        return np.array([np.cos(theta), np.sin(theta)])

    def unembed(self, e: np.ndarray) -> np.ndarray:
        return np.array([np.arctan2(e[1], e[0])])


class TorusModel(AngleModel):
    """Flat torus embedded in R^3 as a surface of revolution."""

    name = "torus"
    dim = 2
    coord_dim = 2
    euler_characteristic = 0
    coordinate_names = ("theta1", "theta2")
    major_radius = 2.0
    minor_radius = 1.0

    def _build_charts(self) -> tuple[Chart, ...]:
        return self._product_charts()

    def embed(self, p: np.ndarray) -> np.ndarray:
        t1, t2 = np.atleast_1d(p)[:2]
        ring = self.major_radius + self.minor_radius * np.cos(t2)
        return np.array([ring * np.cos(t1), ring * np.sin(t1), self.minor_radius * np.sin(t2)])

    def unembed(self, e: np.ndarray) -> np.ndarray:
        ring = np.hypot(e[0], e[1]) - self.major_radius
        return np.array([np.arctan2(e[1], e[0]), np.arctan2(e[2], ring)])


class ProductOfCirclesModel(AngleModel):
    """T^k with the Clifford embedding into R^{2k}."""

    euler_characteristic = 0

    def __init__(self, factors: int) -> None:
        if factors not in (1, 2):
            raise ManifoldError(
                "product-of-circles supports 1 or 2 factors", name="product-of-circles"
            )
        self.name = "product-of-circles"
        self.dim = factors
        self.coord_dim = factors
        self.coordinate_names = tuple(f"theta{k + 1}" for k in range(factors))
        super().__init__()

    def _build_charts(self) -> tuple[Chart, ...]:
        return self._product_charts()

    def embed(self, p: np.ndarray) -> np.ndarray:
        angles = np.atleast_1d(p)[: self.coord_dim]
        return np.ravel(np.column_stack([np.cos(angles), np.sin(angles)]))

    def unembed(self, e: np.ndarray) -> np.ndarray:
        pairs = np.reshape(np.asarray(e, dtype=float), (self.coord_dim, 2))
        return np.arctan2(pairs[:, 1], pairs[:, 0])


class SphereModel(ManifoldModel):
    """Round unit sphere, coordinates are the embedding itself."""

    name = "sphere"
    dim = 2
    coord_dim = 3
    euler_characteristic = 2
    coordinate_names = ("x", "y", "z")
    pole_margin = 0.95

    def _build_charts(self) -> tuple[Chart, ...]:
        def stereo(sign: float, label: str) -> Chart:
            def to_local(p: np.ndarray) -> np.ndarray:
                p = np.asarray(p, dtype=float)
                return p[:2] / (1.0 - sign * p[2])

            def from_local(z: np.ndarray) -> np.ndarray:
                z = np.asarray(z, dtype=float)
                r2 = float(z @ z)
                return np.array([2 * z[0], 2 * z[1], sign * (r2 - 1.0)]) / (r2 + 1.0)

            return Chart(
                name=f"stereo-{label}",
                to_local=to_local,
                from_local=from_local,
                contains=lambda p: bool(sign * np.asarray(p)[2] < self.pole_margin),
            )

        return stereo(1.0, "north"), stereo(-1.0, "south")

    def normalize(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return p / np.linalg.norm(p)

    def embed(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(p, dtype=float)

    def unembed(self, e: np.ndarray) -> np.ndarray:
        return self.normalize(e)

    def tangent_basis(self, p: np.ndarray) -> np.ndarray:
        n = self.normalize(p)
        helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = helper - (helper @ n) * n
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        return np.column_stack([e1, e2])

    def difference(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        p = self.normalize(p)
        q = self.normalize(q)
        cos_angle = float(np.clip(p @ q, -1.0, 1.0))
        angle = np.arctan2(np.linalg.norm(np.cross(p, q)), cos_angle)
        direction = q - cos_angle * p
        norm = np.linalg.norm(direction)
        if norm < 1e-15:
            return np.zeros(3)
        return angle * direction / norm

    def distance(self, p: np.ndarray, q: np.ndarray) -> float:
        """Great-circle distance, from the chord so that nearby points stay exact."""
        chord = float(np.linalg.norm(self.normalize(p) - self.normalize(q)))
        return float(2.0 * np.arcsin(min(1.0, chord / 2.0)))

    def retract(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        p = self.normalize(p)
        v = np.asarray(v, dtype=float) - (np.asarray(v, dtype=float) @ p) * p
        angle = np.linalg.norm(v)
        if angle < 1e-15:
            return p
        return self.normalize(np.cos(angle) * p + np.sin(angle) * v / angle)

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        return self.normalize(rng.normal(size=3))

    def default_base_point(self) -> np.ndarray:
        return self.normalize(np.array([0.6, 0.3, 0.2]))


def build_builtin(name: str, params: ResolutionSettings | None = None) -> ManifoldModel:
    """Build and validate a builtin manifold model."""
    params = params or ResolutionSettings()
    if params.samples <= 0:
        raise ManifoldError("Resolution must be positive", name=name)

    if name == "circle":
        model: ManifoldModel = CircleModel()
    elif name == "torus":
        model = TorusModel()
    elif name == "sphere":
        model = SphereModel()
    elif name == "product-of-circles":
        model = ProductOfCirclesModel(params.factors)
    else:
        raise ManifoldError(f"Unknown builtin manifold: {name}", name=name)

    model.validate(samples=params.samples, seed=params.seed)
    return model
