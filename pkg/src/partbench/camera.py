"""Pinhole cameras aimed at the origin and the four-view rig.

World frame is z-up.  A camera at azimuth ``a`` and elevation ``e`` sits at
``distance * (cos e cos a, cos e sin a, sin e)``.  Pixel ``(r, c)`` of an
``H x W`` image looks through its centre; rows grow downwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RIG_ELEVATION = 20.0
RIG_AZIMUTHS = (0.0, 90.0, 180.0, 270.0)
DEFAULT_FOV = 40.0
DISTANCE_FACTOR = 2.7  # camera distance per unit of scene radius
WORLD_UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Camera:
    azimuth: float
    elevation: float
    distance: float
    fov: float
    height: int
    width: int

    def __post_init__(self):
        if not 10.0 < self.fov < 120.0:
            raise ValueError("fov must lie in (10, 120) degrees")
        if self.distance <= 0:
            raise ValueError("camera distance must be positive")
        if self.height <= 0 or self.width <= 0:
            raise ValueError("image size must be positive")

    @property
    def position(self) -> np.ndarray:
        a, e = np.radians(self.azimuth), np.radians(self.elevation)
        return self.distance * np.array([np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)])

    def basis(self):
        """``(right, up, forward)`` unit vectors; forward points at the origin."""
        forward = -self.position / np.linalg.norm(self.position)
        right = np.cross(forward, WORLD_UP)
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return right, up, forward

    @property
    def tan_half(self) -> float:
        return float(np.tan(np.radians(self.fov) / 2.0))

    def rays(self):
        """Origins ``(3,)`` and unit directions ``(H, W, 3)``."""
        right, up, forward = self.basis()
        aspect = self.width / self.height
        xs = ((np.arange(self.width) + 0.5) / self.width * 2.0 - 1.0) * self.tan_half * aspect
        ys = (1.0 - (np.arange(self.height) + 0.5) / self.height * 2.0) * self.tan_half
        d = forward + xs[None, :, None] * right + ys[:, None, None] * up
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        return self.position, d

    def project(self, points: np.ndarray):
        """Continuous pixel coordinates ``(row, col)`` and ray distance.

        Points behind the camera get ``nan`` coordinates.
        """
        right, up, forward = self.basis()
        v = np.asarray(points, dtype=np.float64) - self.position
        z = v @ forward
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (v @ right) / z / (self.tan_half * self.width / self.height)
            y = (v @ up) / z / self.tan_half
        col = (x + 1.0) * 0.5 * self.width - 0.5
        row = (1.0 - y) * 0.5 * self.height - 0.5
        behind = z <= 0
        col = np.where(behind, np.nan, col)
        row = np.where(behind, np.nan, row)
        return row, col, np.linalg.norm(v, axis=-1)

    def pixel_of(self, points: np.ndarray):
        """Integer pixel indices and an in-image flag for each point."""
        row, col, dist = self.project(points)
        with np.errstate(invalid="ignore"):
            r = np.floor(row + 0.5)
            c = np.floor(col + 0.5)
            inside = (r >= 0) & (r < self.height) & (c >= 0) & (c < self.width)
        r = np.where(inside, r, 0).astype(np.int64)
        c = np.where(inside, c, 0).astype(np.int64)
        return r, c, inside, dist

    def to_dict(self) -> dict:
        return {
            "azimuth": self.azimuth,
            "elevation": self.elevation,
            "distance": self.distance,
            "fov": self.fov,
            "height": self.height,
            "width": self.width,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Camera":
        return cls(**{k: doc[k] for k in ("azimuth", "elevation", "distance", "fov", "height", "width")})


def make_rig(height: int = 128, width: int = 128, distance: float = DISTANCE_FACTOR, fov: float = DEFAULT_FOV):
    """Four cameras at azimuths 0/90/180/270 and 20 degrees elevation.

    Grid placement is row-major: (0, 90) on top, (180, 270) below.
    """
    return [Camera(a, RIG_ELEVATION, float(distance), float(fov), int(height), int(width)) for a in RIG_AZIMUTHS]


def novel_cameras(n: int, seed: int, like: Camera):
    """Seeded novel viewpoints: uniform azimuth, elevation in [0, 40] degrees."""
    rng = np.random.default_rng(seed)
    az = rng.uniform(0.0, 360.0, size=n)
    el = rng.uniform(0.0, 40.0, size=n)
    return [Camera(float(a), float(e), like.distance, like.fov, like.height, like.width) for a, e in zip(az, el)]


# grid helpers ----------------------------------------------------------------


def tile_slices(k: int, height: int, width: int):
    r, c = divmod(k, 2)
    return slice(r * height, (r + 1) * height), slice(c * width, (c + 1) * width)


def tiles_to_grid(tiles):
    """Assemble four equally sized tiles (leading axes H, W) into a 2x2 grid."""
    top = np.concatenate([tiles[0], tiles[1]], axis=1)
    bottom = np.concatenate([tiles[2], tiles[3]], axis=1)
    return np.concatenate([top, bottom], axis=0)


def grid_to_tiles(grid):
    h, w = grid.shape[0] // 2, grid.shape[1] // 2
    return [grid[tile_slices(k, h, w)] for k in range(4)]
