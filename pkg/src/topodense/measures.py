"""Samplable synthetic measures on R^d and ball-union reference sets."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .persistence import as_point_cloud

__all__ = [
    "Distribution",
    "PointMass",
    "Gaussian",
    "GaussianMixture",
    "UniformBall",
    "Ring",
    "ReferenceSet",
]


@runtime_checkable
class Distribution(Protocol):
    dim: int

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray: ...


@dataclass(frozen=True)
class PointMass:
    point: Sequence[float]

    @property
    def dim(self) -> int:
        return len(self.point)

    def sample(self, rng, size):
        return np.tile(np.asarray(self.point, dtype=np.float64), (size, 1))


@dataclass(frozen=True)
class Gaussian:
    mean: Sequence[float]
    scale: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.mean)

    def sample(self, rng, size):
        mu = np.asarray(self.mean, dtype=np.float64)
        return mu + self.scale * rng.standard_normal((size, mu.shape[0]))


@dataclass(frozen=True)
class GaussianMixture:
    """Isotropic Gaussian components with the given weights, means and scales."""

    weights: Sequence[float]
    means: Sequence[Sequence[float]]
    scales: Sequence[float]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if not (len(self.means) == len(self.scales) == len(w)):
            raise ValueError("weights, means and scales must have equal length")
        if np.any(np.asarray(self.scales) < 0):
            raise ValueError("scales must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.means[0])

    def sample(self, rng, size):
        means = np.asarray(self.means, dtype=np.float64)
        scales = np.asarray(self.scales, dtype=np.float64)
        comp = rng.choice(len(self.weights), size=size, p=np.asarray(self.weights))
        noise = rng.standard_normal((size, means.shape[1]))
        return means[comp] + scales[comp, None] * noise


@dataclass(frozen=True)
class UniformBall:
    center: Sequence[float]
    radius: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.center)

    def sample(self, rng, size):
        c = np.asarray(self.center, dtype=np.float64)
        d = c.shape[0]
        g = rng.standard_normal((size, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.radius * rng.random(size) ** (1.0 / d)
        return c + r[:, None] * g


@dataclass(frozen=True)
class Ring:
    """Planar annulus: angle uniform, radius uniform on [radius - width, radius + width]."""

    radius: float = 1.0
    width: float = 0.1
    center: Sequence[float] = (0.0, 0.0)

    dim: int = field(default=2, init=False)

    def sample(self, rng, size):
        theta = rng.uniform(0.0, 2 * np.pi, size)
        rad = rng.uniform(self.radius - self.width, self.radius + self.width, size)
        c = np.asarray(self.center, dtype=np.float64)
        return c + np.column_stack([rad * np.cos(theta), rad * np.sin(theta)])


@dataclass
class ReferenceSet:
    """Union of closed balls of a common radius around anchor points.

    ``z`` belongs to the set iff its distance to the nearest anchor is at most
    ``radius``, and to the extension iff that distance is at most
    ``radius + extension``.
    """

    anchors: np.ndarray
    radius: float
    extension: float = 0.0

    def __post_init__(self):
        self.anchors = as_point_cloud(self.anchors)
        if self.radius < 0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")
        if self.extension < 0:
            raise ValueError(f"extension must be nonnegative, got {self.extension}")

    def distance(self, z) -> np.ndarray:
        """Distance of each row of ``z`` to the nearest anchor."""
        z = np.asarray(z, dtype=np.float64)
        if z.ndim == 1:
            z = z[None, :]
        if z.shape[1] != self.anchors.shape[1]:
            raise ValueError(
                f"points have dimension {z.shape[1]}, anchors {self.anchors.shape[1]}"
            )
        out = np.empty(z.shape[0])
        # chunked to bound the (chunk, n_anchors) distance block
        step = max(1, 2**20 // max(1, self.anchors.shape[0]))
        for s in range(0, z.shape[0], step):
            diff = z[s : s + step, None, :] - self.anchors[None, :, :]
            out[s : s + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
        return out

    def contains(self, z) -> np.ndarray:
        return self.distance(z) <= self.radius

    def extension_contains(self, z) -> np.ndarray:
        return self.distance(z) <= self.radius + self.extension
