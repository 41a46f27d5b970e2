"""Stable Morse data on M x R^{N+} x R^{N-}.

The function is ``f = q + chi(|x|^2) f0(p)`` with ``q = |x+|^2 - |x-|^2`` and
a cutoff ``chi`` equal to 1 near the zero section and 0 beyond the support
radius. The pseudo-gradient is the gradient of f plus bump perturbations
projected onto the level sets of f, so ``df(X) = |grad f|^2`` holds
everywhere.

States are flat arrays ``[p..., x+, x-]``; both fibers are one dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from morsepi.exceptions import FlowError, ScenarioError
from morsepi.flowfield.terms import CompiledTerm
from morsepi.geometry.manifold import ManifoldModel

SUPPORTED_FIBER_DIM = 1
STAR = "star"
AUX = "aux"


def _smooth(t: float) -> float:
    return np.exp(-1.0 / t) if t > 0.0 else 0.0


def _smooth_prime(t: float) -> float:
    return np.exp(-1.0 / t) / (t * t) if t > 0.0 else 0.0


def bump(rho2: float) -> float:
    """``exp(1 - 1/(1 - rho^2))`` inside the unit ball, 0 outside."""
    if rho2 >= 1.0:
        return 0.0
    return float(np.exp(1.0 - 1.0 / (1.0 - rho2)))


@dataclass(frozen=True)
class Perturbation:
    """Bump-supported vector field added to the gradient."""

    kind: str
    center: np.ndarray
    radius: float
    vector: np.ndarray | None = None
    rate: float = 0.0

    def weight(self, data: "StableMorseData", u: np.ndarray) -> float:
        gap = data.difference(self.center, u)
        return bump(float(gap @ gap) / self.radius**2)

    def field(self, data: "StableMorseData", u: np.ndarray) -> np.ndarray:
        w = self.weight(data, u)
        out = np.zeros(data.state_dim)
        if w == 0.0:
            return out
        if self.kind == "vector":
            out[:] = self.vector * w
            p = data.point(u)
            out[: data.coord_dim] = data.model.project_tangent(p, out[: data.coord_dim])
        else:
            _, xp, xm = data.split(u)
            _, cp, cm = data.split(self.center)
            out[data.coord_dim] = -self.rate * (xm - cm) * w
            out[data.coord_dim + 1] = self.rate * (xp - cp) * w
        return out


@dataclass(frozen=True)
class StableMorseData:
    """The pair (f, X) with base points."""

    model: ManifoldModel
    base_term: CompiledTerm
    support_radius: float
    base_point: np.ndarray
    aux_base_point: np.ndarray | None = None
    perturbations: tuple[Perturbation, ...] = field(default_factory=tuple)
    mirrored: bool = False
    base_label: str = STAR
    stabilizer: float = 1.0

    # Layout

    @property
    def n(self) -> int:
        return self.model.dim

    @property
    def coord_dim(self) -> int:
        return self.model.coord_dim

    @property
    def state_dim(self) -> int:
        return self.coord_dim + 2

    @property
    def nplus(self) -> int:
        return SUPPORTED_FIBER_DIM

    @property
    def nminus(self) -> int:
        return SUPPORTED_FIBER_DIM

    def split(self, u: np.ndarray) -> tuple[np.ndarray, float, float]:
        u = np.asarray(u, dtype=float)
        return u[: self.coord_dim], float(u[self.coord_dim]), float(u[self.coord_dim + 1])

    def point(self, u: np.ndarray) -> np.ndarray:
        """Projection to M."""
        return np.asarray(u, dtype=float)[: self.coord_dim]

    def state(self, p: np.ndarray, xp: float = 0.0, xm: float = 0.0) -> np.ndarray:
        return np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)), [xp, xm]])

    def normalize_state(self, u: np.ndarray) -> np.ndarray:
        u = np.array(u, dtype=float)
        u[: self.coord_dim] = self.model.normalize(u[: self.coord_dim])
        return u

    def difference(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.concatenate(
            [self.model.difference(u[: self.coord_dim], v[: self.coord_dim]), v[self.coord_dim :] - u[self.coord_dim :]]
        )

    def displace(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Move a state along an ambient displacement, staying on M."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        p = self.model.retract(u[: self.coord_dim], v[: self.coord_dim])
        return np.concatenate([p, u[self.coord_dim :] + v[self.coord_dim :]])

    def distance(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.linalg.norm(self.difference(u, v)))

    def tangent_basis(self, u: np.ndarray) -> np.ndarray:
        """Orthonormal basis of the tangent space of the total space."""
        base = self.model.tangent_basis(self.point(u))
        out = np.zeros((self.state_dim, self.n + 2))
        out[: self.coord_dim, : self.n] = base
        out[self.coord_dim, self.n] = 1.0
        out[self.coord_dim + 1, self.n + 1] = 1.0
        return out

    def fiber_norm(self, u: np.ndarray) -> float:
        _, xp, xm = self.split(u)
        return float(np.hypot(xp, xm))

    def embed_state(self, u: np.ndarray) -> np.ndarray:
        """Continuous Euclidean image of a state, used to compare paths."""
        p, xp, xm = self.split(u)
        return np.concatenate([self.model.embed(p), [xp, xm]])

    # Slices: E+ is {x- = 0}, E- is {x+ = 0}

    def slice_plus(self, u: np.ndarray) -> float:
        return float(np.asarray(u)[self.coord_dim + 1])

    def slice_minus(self, u: np.ndarray) -> float:
        return float(np.asarray(u)[self.coord_dim])

    # Cutoff

    def cutoff(self, s: float) -> float:
        r2 = self.support_radius**2
        t = (s - r2 / 4.0) / (0.75 * r2)
        if t <= 0.0:
            return 1.0
        if t >= 1.0:
            return 0.0
        a, b = _smooth(t), _smooth(1.0 - t)
        return 1.0 - a / (a + b)

    def cutoff_derivative(self, s: float) -> float:
        r2 = self.support_radius**2
        t = (s - r2 / 4.0) / (0.75 * r2)
        if t <= 0.0 or t >= 1.0:
            return 0.0
        a, b = _smooth(t), _smooth(1.0 - t)
        da, db = _smooth_prime(t), _smooth_prime(1.0 - t)
        return -((da * b + a * db) / (a + b) ** 2) / (0.75 * r2)

    # Raw data in the unmirrored frame

    def _swap(self, u: np.ndarray) -> np.ndarray:
        out = np.array(u, dtype=float)
        out[self.coord_dim], out[self.coord_dim + 1] = out[self.coord_dim + 1], out[self.coord_dim]
        return out

    def _raw_value(self, u: np.ndarray) -> float:
        p, xp, xm = self.split(u)
        s = xp * xp + xm * xm
        return xp * xp - xm * xm + self.cutoff(s) * self.base_term.value(p)

    def _raw_gradient(self, u: np.ndarray) -> np.ndarray:
        p, xp, xm = self.split(u)
        s = xp * xp + xm * xm
        f0 = self.base_term.value(p)
        chi, dchi = self.cutoff(s), self.cutoff_derivative(s)
        out = np.zeros(self.state_dim)
        out[: self.coord_dim] = chi * self.model.project_tangent(p, self.base_term.gradient(p))
        out[self.coord_dim] = 2.0 * xp * (1.0 + dchi * f0)
        out[self.coord_dim + 1] = -2.0 * xm * (1.0 - dchi * f0)
        return out

    def _raw_field(self, u: np.ndarray) -> np.ndarray:
        g = self._raw_gradient(u)
        if not self.perturbations:
            return g
        extra = sum(pert.field(self, u) for pert in self.perturbations)
        g2 = float(g @ g)
        if g2 < 1e-30:
            return g
        return g + extra - (float(extra @ g) / g2) * g

    def _stabilization(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.state_dim)
        if self.model.name == "sphere":
            p = self.point(u)
            out[: self.coord_dim] = self.stabilizer * (float(p @ p) - 1.0) * p
        return out

    # Public data, mirrored when requested

    def value(self, u: np.ndarray) -> float:
        if self.mirrored:
            return -self._raw_value(self._swap(u))
        return self._raw_value(u)

    def gradient(self, u: np.ndarray) -> np.ndarray:
        if self.mirrored:
            return -self._swap(self._raw_gradient(self._swap(u)))
        return self._raw_gradient(u)

    def vector_field(self, u: np.ndarray) -> np.ndarray:
        """The pseudo-gradient X; trajectories solve u' = -X(u)."""
        if self.mirrored:
            base = -self._swap(self._raw_field(self._swap(u)))
        else:
            base = self._raw_field(u)
        return base + self._stabilization(u)

    def critical_residual(self, u: np.ndarray) -> np.ndarray:
        """Zero exactly at critical points (sphere states forced onto the sphere)."""
        return self.gradient(u) + self._stabilization(u)

    def quadratic(self, u: np.ndarray) -> float:
        _, xp, xm = self.split(u)
        return xp * xp - xm * xm

    def quadratic_gradient(self, u: np.ndarray) -> np.ndarray:
        _, xp, xm = self.split(u)
        out = np.zeros(self.state_dim)
        out[self.coord_dim] = 2.0 * xp
        out[self.coord_dim + 1] = -2.0 * xm
        return out

    # Variants

    def reversed(self, base_point: np.ndarray | None = None) -> "StableMorseData":
        """Mirrored data (-f, -X) with swapped fibers, based at the aux point."""
        new_base = self.aux_base_point if base_point is None else base_point
        if new_base is None:
            raise FlowError("Mirrored data needs a base point")
        return replace(
            self,
            mirrored=not self.mirrored,
            base_point=np.asarray(new_base, dtype=float),
            aux_base_point=self.base_point,
            base_label=AUX if self.base_label == STAR else STAR,
        )

    def with_base_point(self, base_point: np.ndarray, aux_base_point: np.ndarray | None = None):
        return replace(
            self,
            base_point=self.model.normalize(base_point),
            aux_base_point=None if aux_base_point is None else self.model.normalize(aux_base_point),
        )

    def base_path(self, samples: int = 9) -> np.ndarray:
        """Short path delta from the base point to the aux base point."""
        if self.aux_base_point is None:
            return np.array([self.base_point])
        return np.array(
            [
                self.model.geodesic(self.base_point, self.aux_base_point, k / (samples - 1))
                for k in range(samples)
            ]
        )

    # Checks

    def check_cutoff(self, samples: int = 256, seed: int = 0) -> None:
        """No critical points may appear where the cutoff varies."""
        rng = np.random.default_rng(seed)
        bound = self.base_term.bound([self.model.random_point(rng) for _ in range(samples)])
        r2 = self.support_radius**2
        steepest = max(abs(self.cutoff_derivative(s)) for s in np.linspace(r2 / 4, r2, 257))
        if steepest * bound >= 1.0:
            raise ScenarioError(
                "support_radius too small for the base term",
                field="support_radius",
                details={"cutoff_slope": steepest, "term_bound": bound},
            )

    def check_support(self) -> None:
        for index, pert in enumerate(self.perturbations):
            _, cp, cm = self.split(pert.center)
            if np.hypot(cp, cm) + pert.radius >= self.support_radius:
                raise ScenarioError(
                    "Perturbation support leaves the compact region",
                    field=f"perturbation {index}",
                )

    def check_invariants(self, samples: int = 64, seed: int = 0, tolerance: float = 1e-9) -> None:
        """Sampled check of the support and descent conditions."""
        rng = np.random.default_rng(seed)
        R = self.support_radius
        for _ in range(samples):
            p = self.model.random_point(rng)
            angle = rng.uniform(0.0, 2.0 * np.pi)
            radius = rng.uniform(1.01 * R, 2.0 * R)
            u = self.state(p, radius * np.cos(angle), radius * np.sin(angle))
            sign = -1.0 if self.mirrored else 1.0
            if abs(self.value(u) - sign * self.quadratic(u)) > tolerance:
                raise FlowError("f differs from q outside the support", details={"state": list(u)})
            gap = self.vector_field(u) - sign * self.quadratic_gradient(u)
            if np.max(np.abs(gap)) > tolerance:
                raise FlowError("X differs from grad q outside the support")

            inner = self.state(
                p, rng.uniform(-R, R) / 2.0, rng.uniform(-R, R) / 2.0
            )
            g = self.gradient(inner)
            if float(g @ g) > 1e-16 and float(g @ self.vector_field(inner)) <= 0.0:
                raise FlowError("df(X) is not positive", details={"state": list(inner)})

        if self.aux_base_point is not None:
            gap = self.model.distance(self.base_point, self.aux_base_point)
            if gap == 0.0 or gap > 0.05:
                raise FlowError("Aux base point must be a small perturbation of the base point")
