"""Seeded synthetic point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "LabeledPointCloud",
    "sample_ball",
    "sample_gaussian_mixture",
    "sample_manifold",
    "sample_two_moons",
]


@dataclass
class LabeledPointCloud:
    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.points)):
            raise ParameterError("points must be finite")
        if self.labels is not None and len(self.labels) != len(self.points):
            raise ParameterError("labels must have one entry per point")

    def __len__(self):
        return len(self.points)


def sample_ball(n, d, seed=None):
    """n uniform samples in the closed unit ball of R^d."""
    if n < 1 or d < 1:
        raise ParameterError("need n >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = rng.random((n, 1)) ** (1.0 / d)
    return LabeledPointCloud(g / norms * r)


def sample_two_moons(n=2000, noise=0.1, seed=None):
    """Two interlocking unit half circles, class 1 shifted by (1, -0.5)."""
    if n < 2 or n % 2:
        raise ParameterError("n must be a positive even number")
    rng = np.random.default_rng(seed)
    m = n // 2
    t0 = np.pi * rng.random(m)
    t1 = np.pi * rng.random(m)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    X = np.vstack([upper, lower])
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    labels = np.repeat([0, 1], m)
    return LabeledPointCloud(X, labels)


def sample_gaussian_mixture(centers, counts, stddev=1.0, seed=None):
    """Isotropic Gaussian clusters; the label is the component index.

    ``stddev`` is a scalar or one value per component.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (len(centers),) or np.any(counts < 1):
        raise ParameterError("need one positive count per center")
    sd = np.broadcast_to(np.asarray(stddev, dtype=np.float64), (len(centers),))
    rng = np.random.default_rng(seed)
    parts = [c + s * rng.standard_normal((m, centers.shape[1])) for c, m, s in zip(centers, counts, sd)]
    return LabeledPointCloud(np.vstack(parts), np.repeat(np.arange(len(centers)), counts))


def sample_manifold(name, n, seed=None, noise=0.0):
    """Points on a 3-D toy manifold: "helix", "half_sphere" or "swiss_roll"."""
    rng = np.random.default_rng(seed)
    if name == "helix":
        t = 4 * np.pi * rng.random(n)
        X = np.column_stack([np.cos(t), np.sin(t), t / (2 * np.pi)])
    elif name == "half_sphere":
        g = rng.standard_normal((n, 3))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        g[:, 2] = np.abs(g[:, 2])
        X = g
    elif name == "swiss_roll":
        # uniform in t is denser near the center of the roll
        t = 1.5 * np.pi * (1 + 2 * rng.random(n))
        h = 10 * rng.random(n)
        X = np.column_stack([t * np.cos(t), h, t * np.sin(t)]) / 10.0
    else:
        raise ParameterError(f"unknown manifold {name!r}")
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    return LabeledPointCloud(X)
