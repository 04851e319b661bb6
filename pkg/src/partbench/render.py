"""Sphere-traced multi-view renders with per-part depth and visibility masks.

Each part is traced on its own so that occluded parts still get finite
depth wherever the ray passes through them; visible-part masks then follow
from a per-pixel argmin over those depths.  Shading is Lambertian with a
single directional light fixed in the camera frame plus 0.2 ambient, so the
four tiles of a rotationally symmetric asset shade identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import Camera, grid_to_tiles, tiles_to_grid
from .errors import EmptyForegroundError, GeometryError
from .scene import Asset

AMBIENT = 0.2
PSNR_CAP = 99.0


@dataclass(frozen=True)
class MarchConfig:
    max_steps: int = 160
    hit_epsilon: float = 1e-4
    far_limit: float = 10.0
    shading: str = "lambert-fixed-light"

    def __post_init__(self):
        if self.hit_epsilon <= 0:
            raise ValueError("hit epsilon must be positive")
        if self.shading not in ("lambert-fixed-light", "albedo-flat"):
            raise ValueError(f"unknown shading {self.shading!r}")


@dataclass(eq=False)
class ViewBundle:
    """Renders of one asset from the four-camera rig, assembled as 2x2 grids.

    ``rgb`` is the shaded composite (2H, 2W, 3); ``part_depth`` holds the
    isolated per-part ray depths (S, 2H, 2W) with ``inf`` for misses;
    ``part_rgb`` holds the isolated per-part shaded renders.
    """

    rgb: np.ndarray
    part_depth: np.ndarray
    part_rgb: np.ndarray
    masks: np.ndarray
    foreground: np.ndarray
    cameras: list = field(default_factory=list)

    @property
    def n_parts(self) -> int:
        return self.part_depth.shape[0]

    @property
    def part_foreground(self) -> np.ndarray:
        return np.isfinite(self.part_depth)

    @property
    def tile_shape(self):
        return self.rgb.shape[0] // 2, self.rgb.shape[1] // 2

    def depth(self) -> np.ndarray:
        return self.part_depth.min(axis=0) if self.n_parts else np.full(self.rgb.shape[:2], np.inf)

    def hit_points(self) -> np.ndarray:
        """World-space first-hit points of the composite (nan on background)."""
        h, w = self.tile_shape
        tiles = []
        depth = grid_to_tiles(self.depth())
        for cam, t in zip(self.cameras, depth):
            origin, dirs = cam.rays()
            tiles.append(origin + np.where(np.isfinite(t), t, np.nan)[..., None] * dirs)
        return tiles_to_grid(tiles)


def _light_direction(cam: Camera) -> np.ndarray:
    right, up, forward = cam.basis()
    light = 0.6 * up - 0.8 * forward
    return light / np.linalg.norm(light)


def _bounding_interval(origin, dirs, radius):
    """Entry/exit distances of rays against the origin-centred ball."""
    b = dirs @ origin
    c = origin @ origin - radius * radius
    disc = b * b - c
    hit = disc > 0
    root = np.sqrt(np.where(hit, disc, 0.0))
    return np.maximum(-b - root, 0.0), -b + root, hit


def sphere_trace(dist_fn, origin: np.ndarray, dirs: np.ndarray, radius: float, cfg: MarchConfig) -> np.ndarray:
    """First-hit distance along each ray, ``inf`` where nothing is hit."""
    n = dirs.shape[0]
    t_near, t_far, hit_ball = _bounding_interval(origin, dirs, radius)
    t_far = np.minimum(t_far, cfg.far_limit)
    out = np.full(n, np.inf)
    idx = np.flatnonzero(hit_ball)
    t = t_near[idx]
    for _ in range(cfg.max_steps):
        if idx.size == 0:
            break
        d = dist_fn(origin + t[:, None] * dirs[idx])
        if not np.all(np.isfinite(d)):
            raise GeometryError("non-finite SDF value", code="geometry-nan")
        done = d < cfg.hit_epsilon
        out[idx[done]] = t[done]
        t = t + d
        keep = ~done & (t < t_far[idx])
        idx, t = idx[keep], t[keep]
    return out


def _shade(asset: Asset, k: int, points: np.ndarray, cam: Camera, cfg: MarchConfig) -> np.ndarray:
    albedo = asset.part_albedo(k, points)
    if cfg.shading == "albedo-flat":
        return albedo
    h = 1e-4
    normal = np.empty_like(points)
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        normal[:, axis] = asset.part_distance(k, points + step) - asset.part_distance(k, points - step)
    normal /= np.maximum(np.linalg.norm(normal, axis=-1, keepdims=True), 1e-12)
    lambert = np.maximum(normal @ _light_direction(cam), 0.0)
    return np.clip(albedo * (AMBIENT + (1.0 - AMBIENT) * lambert)[:, None], 0.0, 1.0)


def render_part_tiles(asset: Asset, k: int, cam: Camera, cfg: MarchConfig):
    """Isolated render of part ``k``: depth (H, W) and shaded RGB (H, W, 3)."""
    origin, dirs = cam.rays()
    flat = dirs.reshape(-1, 3)
    radius = asset.radius() * 1.001 + cfg.hit_epsilon
    t = sphere_trace(lambda p: asset.part_distance(k, p), origin, flat, radius, cfg)
    rgb = np.zeros(flat.shape)
    hit = np.isfinite(t)
    if hit.any():
        pts = origin + t[hit, None] * flat[hit]
        rgb[hit] = _shade(asset, k, pts, cam, cfg)
    return t.reshape(cam.height, cam.width), rgb.reshape(cam.height, cam.width, 3)


def derive_masks(part_depth: np.ndarray) -> np.ndarray:
    """Visible-part masks from per-part depths: pixel belongs to the argmin part.

    Ties go to the lowest part index; pixels with no finite depth belong to
    no mask.
    """
    part_depth = np.asarray(part_depth, dtype=np.float64)
    s = part_depth.shape[0]
    masks = np.zeros(part_depth.shape, dtype=bool)
    if s == 0:
        return masks
    owner = np.argmin(part_depth, axis=0)
    finite = np.isfinite(part_depth.min(axis=0))
    for k in range(s):
        masks[k] = finite & (owner == k)
    return masks


def render_views(asset: Asset, rig, cfg: MarchConfig = MarchConfig()) -> ViewBundle:
    depth_tiles = [[] for _ in range(asset.n_parts)]
    rgb_tiles = [[] for _ in range(asset.n_parts)]
    for cam in rig:
        for k in range(asset.n_parts):
            t, rgb = render_part_tiles(asset, k, cam, cfg)
            depth_tiles[k].append(t)
            rgb_tiles[k].append(rgb)
    part_depth = np.stack([tiles_to_grid(t) for t in depth_tiles])
    part_rgb = np.stack([tiles_to_grid(t) for t in rgb_tiles])
    masks = derive_masks(part_depth)
    rgb = np.zeros(part_rgb.shape[1:])
    for k in range(asset.n_parts):
        rgb[masks[k]] = part_rgb[k][masks[k]]
    foreground = np.isfinite(part_depth).any(axis=0)
    return ViewBundle(rgb, part_depth, part_rgb, masks, foreground, list(rig))


def render_rgb(asset: Asset, cam: Camera, cfg: MarchConfig = MarchConfig()):
    """Single-camera composite render: RGB (H, W, 3) and foreground mask."""
    depths, rgbs = zip(*(render_part_tiles(asset, k, cam, cfg) for k in range(asset.n_parts)))
    depths = np.stack(depths)
    masks = derive_masks(depths)
    rgb = np.zeros(rgbs[0].shape)
    for k, m in enumerate(masks):
        rgb[m] = rgbs[k][m]
    return rgb, masks.any(axis=0)


def foreground_psnr(target: np.ndarray, estimate: np.ndarray, mask: np.ndarray, peak: float = 1.0) -> float:
    """PSNR in dB over the masked pixels; identical inputs give ``PSNR_CAP``."""
    mask = np.asarray(mask, dtype=bool)
    if target.shape != estimate.shape or target.shape[: mask.ndim] != mask.shape:
        raise ValueError("images and mask must share a resolution")
    if not mask.any():
        raise EmptyForegroundError("PSNR mask has no pixels")
    diff = np.asarray(target, dtype=np.float64)[mask] - np.asarray(estimate, dtype=np.float64)[mask]
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(peak * peak / mse)))
