"""Geometric domain descriptors shared by the pair and zero-set modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Ball:
    """Open euclidean ball; `center` has one coordinate per dimension."""

    center: tuple
    radius: float

    @property
    def dimension(self) -> int:
        return len(self.center)

    def bounding_box(self) -> "Box":
        c = np.asarray(self.center, dtype=float)
        r = float(self.radius)
        return Box(tuple(c - r), tuple(c + r))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d2 = ((pts - np.asarray(self.center)) ** 2).sum(axis=1)
        return d2 < self.radius**2


def ball(radius: float, dimension: int) -> Ball:
    return Ball((0.0,) * dimension, float(radius))


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed box given by per-axis lower/upper corners."""

    lo: tuple
    hi: tuple

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def bounding_box(self) -> "Box":
        return self

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def axes(self, resolution: int) -> list:
        """Per-axis corner coordinates for a uniform grid of `resolution` cells."""
        return [
            np.linspace(self.lo[k], self.hi[k], resolution + 1)
            for k in range(self.dimension)
        ]
