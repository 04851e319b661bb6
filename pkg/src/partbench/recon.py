"""Part reconstruction by silhouette carving, and emission-absorption rendering
of the resulting opacity/colour fields.

Fields live on a regular voxel grid.  They are sampled trilinearly in
premultiplied form: density and density-weighted colour are interpolated
separately and the colour at a point is their ratio.  This keeps colours
from bleeding towards black at silhouettes and makes summing several
fields commute with interpolation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .camera import Camera, grid_to_tiles, tiles_to_grid
from .errors import FormatError

FIELD_MAGIC = b"PBPF"
FIELD_VERSION = 1
DEFAULT_KAPPA = 50.0
DEFAULT_HALF_EXTENT = 0.92
_CHUNK = 1 << 18


@dataclass(eq=False)
class PartField:
    sigma: np.ndarray  # (R, R, R) density, indexed [x, y, z]
    color: np.ndarray  # (R, R, R, 3)
    bbox: np.ndarray  # (2, 3)
    kappa: float = DEFAULT_KAPPA
    flags: tuple = ()

    def __post_init__(self):
        self.bbox = np.asarray(self.bbox, dtype=np.float64)
        if np.any(self.sigma < 0):
            raise ValueError("densities must be non-negative")

    @property
    def resolution(self) -> int:
        return self.sigma.shape[0]

    @property
    def cell(self) -> np.ndarray:
        return (self.bbox[1] - self.bbox[0]) / self.resolution

    def centres(self) -> np.ndarray:
        axes = [self.bbox[0, i] + (np.arange(self.resolution) + 0.5) * self.cell[i] for i in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def emission(self) -> np.ndarray:
        """Density-weighted colour, (R, R, R, 3)."""
        return self.sigma[..., None] * self.color

    def same_lattice(self, other: "PartField") -> bool:
        return self.sigma.shape == other.sigma.shape and np.array_equal(self.bbox, other.bbox)

    @classmethod
    def empty(cls, resolution: int, bbox, kappa: float = DEFAULT_KAPPA) -> "PartField":
        r = resolution
        return cls(np.zeros((r, r, r)), np.zeros((r, r, r, 3)), bbox, kappa, ("empty",))


@dataclass(frozen=True)
class CarveConfig:
    resolution: int = 64
    kappa: float = DEFAULT_KAPPA
    rule: str = "all-views"
    half_extent: float = DEFAULT_HALF_EXTENT

    def __post_init__(self):
        if not 32 <= self.resolution <= 256:
            raise ValueError("carve resolution must lie in [32, 256]")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.rule not in ("all-views", "visible-views"):
            raise ValueError(f"unknown consistency rule {self.rule!r}")

    @property
    def bbox(self) -> np.ndarray:
        return np.array([[-self.half_extent] * 3, [self.half_extent] * 3])


def _hull_votes(points, silhouettes, cameras):
    """Per view: projected pixel, in-image flag and whether it lands on the silhouette."""
    out = []
    for cam, sil in zip(cameras, silhouettes):
        r, c, inside, dist = cam.pixel_of(points)
        on = inside & sil[r, c]
        out.append((r, c, inside, on, dist))
    return out


def carve(part_views: np.ndarray, part_masks: np.ndarray, rig, cfg: CarveConfig = CarveConfig()) -> PartField:
    """Visual-hull field from four silhouettes and their colours.

    A voxel is occupied when its centre projects onto the silhouette in
    every view ("all-views"), or in every view where it projects inside the
    image ("visible-views").  Occupied voxels get density ``kappa`` and the
    mean colour of the views in which they lie on the carved surface.
    """
    images = grid_to_tiles(np.asarray(part_views, dtype=np.float64))
    sils = grid_to_tiles(np.asarray(part_masks, dtype=bool))
    field = PartField.empty(cfg.resolution, cfg.bbox, cfg.kappa)
    if not any(s.any() for s in sils):
        return field
    pts = field.centres().reshape(-1, 3)
    occupied = np.ones(pts.shape[0], dtype=bool)
    for start in range(0, pts.shape[0], _CHUNK):
        chunk = pts[start : start + _CHUNK]
        ok = np.ones(chunk.shape[0], dtype=bool)
        for r, c, inside, on, _ in _hull_votes(chunk, sils, rig):
            ok &= on if cfg.rule == "all-views" else (on | ~inside)
        occupied[start : start + _CHUNK] = ok
    idx = np.flatnonzero(occupied)
    if idx.size == 0:
        field.flags = ("empty",)
        return field
    occ_pts = pts[idx]
    colour_sum = np.zeros((idx.size, 3))
    seen = np.zeros(idx.size)
    any_sum = np.zeros((idx.size, 3))
    any_count = np.zeros(idx.size)
    tol = 2.0 * float(np.linalg.norm(field.cell))
    for cam, img, (r, c, inside, on, dist) in zip(rig, images, _hull_votes(occ_pts, sils, rig)):
        flat = r * cam.width + c
        zbuf = np.full(cam.height * cam.width, np.inf)
        np.minimum.at(zbuf, flat[inside], dist[inside])
        visible = inside & (dist <= zbuf[flat] + tol)
        rgb = img[r, c]
        colour_sum[visible] += rgb[visible]
        seen[visible] += 1
        any_sum[inside] += rgb[inside]
        any_count[inside] += 1
    # voxels hidden from every view fall back to the mean over all projections
    colour = np.where(
        seen[:, None] > 0,
        colour_sum / np.maximum(seen, 1)[:, None],
        any_sum / np.maximum(any_count, 1)[:, None],
    )
    sigma = np.zeros(pts.shape[0])
    sigma[idx] = cfg.kappa
    col = np.zeros((pts.shape[0], 3))
    col[idx] = colour
    r = cfg.resolution
    return PartField(sigma.reshape(r, r, r), col.reshape(r, r, r, 3), cfg.bbox, cfg.kappa)


# sampling and emission-absorption rendering -----------------------------------


def sample_field(field: PartField, points: np.ndarray, emission: np.ndarray | None = None):
    """Trilinear density ``(N,)`` and density-weighted colour ``(N, 3)`` at points."""
    coords = ((points - field.bbox[0]) / field.cell - 0.5).T
    sigma = ndimage.map_coordinates(field.sigma, coords, order=1, mode="grid-constant", cval=0.0, prefilter=False)
    if emission is None:
        emission = field.emission()
    emit = np.stack(
        [
            ndimage.map_coordinates(emission[..., ch], coords, order=1, mode="grid-constant", cval=0.0, prefilter=False)
            for ch in range(3)
        ],
        axis=-1,
    )
    return np.maximum(sigma, 0.0), emit


def ray_samples(cam: Camera, step: float, reach: float):
    """Uniformly spaced sample distances covering a ball of radius ``reach``."""
    if step <= 0:
        raise ValueError("step length must be positive")
    t0 = max(cam.distance - reach, 0.0)
    count = int(np.ceil((cam.distance + reach - t0) / step)) + 1
    return t0 + step * np.arange(count)


def transmittance(sigma: np.ndarray, step: float) -> np.ndarray:
    """``T_j = exp(-sum_{k<=j} step * sigma_k)`` along the last axis."""
    return np.exp(-np.cumsum(step * sigma, axis=-1))


def ea_accumulate(sigma: np.ndarray, emission: np.ndarray, step: float):
    """Emission-absorption quadrature for a batch of rays.

    ``sigma`` (rays, R) is the total density and ``emission`` (rays, R, 3)
    the density-weighted colour at each sample.  Each sample contributes
    its visibility ``T_{j-1} - T_j`` (with ``T_{-1} = 1``) times its colour
    ``emission / sigma``.  Returns colour, alpha and per-sample visibility.
    """
    trans = transmittance(sigma, step)
    prev = np.concatenate([np.ones(trans.shape[:-1] + (1,)), trans[..., :-1]], axis=-1)
    vis = prev - trans
    with np.errstate(invalid="ignore", divide="ignore"):
        colour = np.where(sigma[..., None] > 0, emission / sigma[..., None], 0.0)
    rgb = np.einsum("rj,rjc->rc", vis, colour)
    alpha = 1.0 - trans[..., -1]
    return rgb, alpha, vis


def _scene_reach(fields) -> float:
    """Radius of an origin-centred ball enclosing every field's box."""
    return max(float(np.linalg.norm(np.abs(f.bbox).max(axis=0))) for f in fields)


def active_box(field: PartField):
    """Box outside which trilinear samples of the field are exactly zero.

    ``None`` when the field has no density at all.
    """
    occ = np.argwhere(field.sigma > 0)
    if occ.size == 0:
        return None
    lo = field.bbox[0] + (occ.min(axis=0) - 0.5) * field.cell
    hi = field.bbox[0] + (occ.max(axis=0) + 1.5) * field.cell
    return np.stack([lo, hi])


def sample_on_rays(field: PartField, origin, dirs, ts, emission=None):
    """Dense density ``(n, R)`` and emission ``(n, R, 3)`` at ``origin + t * dir``.

    Only samples inside :func:`active_box` are interpolated; every other
    sample is exactly zero, so the result equals exhaustive sampling.
    """
    n, count = dirs.shape[0], ts.size
    sigma = np.zeros((n, count))
    emit = np.zeros((n, count, 3))
    box = active_box(field)
    if box is None:
        return sigma, emit
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t_a = (box[0] - origin) * inv
        t_b = (box[1] - origin) * inv
    t_in = np.nanmax(np.minimum(t_a, t_b), axis=1)
    t_out = np.nanmin(np.maximum(t_a, t_b), axis=1)
    inside = (ts[None, :] >= t_in[:, None]) & (ts[None, :] <= t_out[:, None])
    ray_idx, step_idx = np.nonzero(inside)
    if ray_idx.size == 0:
        return sigma, emit
    pts = origin + dirs[ray_idx] * ts[step_idx, None]
    if emission is None:
        emission = field.emission()
    sig, em = sample_field(field, pts, emission)
    sigma[ray_idx, step_idx] = sig
    emit[ray_idx, step_idx] = em
    return sigma, emit


def render_field(field: PartField, cam: Camera, step: float):
    """EA render of one field: RGB (H, W, 3) and alpha (H, W)."""
    ts = ray_samples(cam, step, _scene_reach([field]))
    origin, dirs = cam.rays()
    flat = dirs.reshape(-1, 3)
    rgb = np.zeros((flat.shape[0], 3))
    alpha = np.zeros(flat.shape[0])
    emission = field.emission()
    rows = max(1, _CHUNK // ts.size)
    for s in range(0, flat.shape[0], rows):
        sig, emit = sample_on_rays(field, origin, flat[s : s + rows], ts, emission)
        hit = np.flatnonzero(sig.any(axis=1))  # empty rays stay black with alpha 0
        c, a, _ = ea_accumulate(sig[hit], emit[hit], step)
        rgb[s + hit] = c
        alpha[s + hit] = a
    return rgb.reshape(cam.height, cam.width, 3), alpha.reshape(cam.height, cam.width)


def render_field_views(field: PartField, rig, step: float):
    """EA renders of a field for each rig camera, assembled as a 2x2 grid."""
    out = [render_field(field, cam, step) for cam in rig]
    return tiles_to_grid([o[0] for o in out]), tiles_to_grid([o[1] for o in out])


# file format -----------------------------------------------------------------------

_HEADER = struct.Struct("<4sIIf6f")


def field_bytes(field: PartField) -> bytes:
    header = _HEADER.pack(FIELD_MAGIC, FIELD_VERSION, field.resolution, field.kappa, *field.bbox.ravel().tolist())
    sigma = np.ascontiguousarray(field.sigma, dtype="<f4").tobytes()
    colour = np.ascontiguousarray(np.moveaxis(field.color, -1, 0), dtype="<f4").tobytes()
    return header + sigma + colour


def write_field(path, field: PartField):
    with open(path, "wb") as fh:
        fh.write(field_bytes(field))


def parse_field(data: bytes) -> PartField:
    if len(data) < _HEADER.size:
        raise FormatError("part field shorter than its header")
    magic, version, res, kappa, *bbox = _HEADER.unpack_from(data)
    if magic != FIELD_MAGIC or version != FIELD_VERSION:
        raise FormatError("not a version-1 part field")
    n = res**3
    body = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    if body.size != 4 * n:
        raise FormatError("part field payload size does not match header")
    sigma = body[:n].reshape(res, res, res).astype(np.float64)
    colour = np.moveaxis(body[n:].reshape(3, res, res, res), 0, -1).astype(np.float64)
    return PartField(sigma, colour, np.asarray(bbox, dtype=np.float64).reshape(2, 3), float(kappa))


def read_field(path) -> PartField:
    with open(path, "rb") as fh:
        return parse_field(fh.read())
