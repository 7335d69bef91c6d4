"""Planar geometry shared by the perception and planning stack.

World coordinates are metric, x/y on the ground plane. Image coordinates
follow the usual raster convention: u to the right, v growing downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi

_EPS_DET = 1e-12
_EPS_W = 1e-12


class DegenerateProjection(ValueError):
    """Homogeneous coordinate vanished while projecting a point."""


class OutOfBounds(ValueError):
    """A world point does not fall on the grid."""


def normalize_angle(theta):
    """Wrap an angle in radians into (-pi, pi]. Works on scalars and arrays."""
    return math.pi - (math.pi - theta) % TAU


@dataclass(frozen=True)
class Pose2:
    """Planar position plus heading; heading is stored normalized to (-pi, pi]."""

    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", float(normalize_angle(self.heading)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


class Homography:
    """Invertible 3x3 projective map between the image plane and the ground plane.

    The convention throughout the package is that a camera's homography maps
    image pixels to ground coordinates; `inverse()` gives the other direction.
    """

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(m)) or abs(np.linalg.det(m)) <= _EPS_DET:
            raise ValueError("homography matrix is not invertible")
        self.matrix = m

    def apply(self, points):
        """Map points of shape (..., 2) through the homography.

        Raises DegenerateProjection if any point lands on the line at infinity.
        """
        p = np.asarray(points, dtype=float)
        ones = np.ones(p.shape[:-1] + (1,))
        h = np.concatenate([p, ones], axis=-1) @ self.matrix.T
        w = h[..., 2]
        if np.any(np.abs(w) < _EPS_W):
            raise DegenerateProjection("homogeneous coordinate vanished")
        return h[..., :2] / w[..., None]

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))

    def flat(self) -> list:
        """Row-major list of the nine matrix entries."""
        return [float(v) for v in self.matrix.ravel()]

    def __repr__(self):
        return f"Homography({self.matrix.tolist()})"


def apply_homography(homography: Homography, points):
    return homography.apply(points)


@dataclass(frozen=True)
class GridSpec:
    """Uniform metric grid over the ground plane.

    Cell (0, 0) has its lower-left corner at (origin_x, origin_y); cell
    centers sit half a resolution further. Cell indices are (ix, iy) with
    ix along +x and iy along +y, while cell arrays are indexed [iy, ix].
    """

    origin_x: float
    origin_y: float
    resolution: float
    width: int
    height: int

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must have at least one cell per axis")

    @property
    def origin(self) -> np.ndarray:
        return np.array([self.origin_x, self.origin_y], dtype=float)

    @property
    def extent(self):
        """(min_x, min_y, max_x, max_y) of the covered rectangle."""
        return (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.width * self.resolution,
            self.origin_y + self.height * self.resolution,
        )

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        ix = math.floor((p[0] - self.origin_x) / self.resolution)
        iy = math.floor((p[1] - self.origin_y) / self.resolution)
        return 0 <= ix < self.width and 0 <= iy < self.height

    def world_to_cell(self, point):
        """Cell index (ix, iy) containing a world point; raises OutOfBounds."""
        p = np.asarray(point, dtype=float)
        ix = math.floor((p[0] - self.origin_x) / self.resolution)
        iy = math.floor((p[1] - self.origin_y) / self.resolution)
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            raise OutOfBounds(f"point ({p[0]}, {p[1]}) is outside the grid")
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return np.array(
            [
                self.origin_x + (ix + 0.5) * self.resolution,
                self.origin_y + (iy + 0.5) * self.resolution,
            ]
        )

    def cell_centers(self) -> np.ndarray:
        """Array of shape (height, width, 2) with every cell center."""
        xs = self.origin_x + (np.arange(self.width) + 0.5) * self.resolution
        ys = self.origin_y + (np.arange(self.height) + 0.5) * self.resolution
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx, gy], axis=-1)


@dataclass(frozen=True)
class PixelBBox:
    """Axis-aligned detector box; (x, y) is the top-left corner, v grows down."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError("bounding box must have positive extent")

    def ground_point(self) -> np.ndarray:
        """Bottom-edge midpoint: the image-plane estimate of the feet position."""
        return np.array([self.x + self.w / 2.0, self.y + self.h])


def bbox_ground_point(bbox: PixelBBox) -> np.ndarray:
    return bbox.ground_point()
