"""Part-decomposed SDF assets: evaluation, volume statistics, filtering and
procedural generation.

An asset is an ordered list of parts; each part is a union of one to four
analytic primitives.  The union SDF is the minimum over parts, and points
are attributed to the part with the smallest distance (lowest index on
ties).  Assets produced by :func:`generate_asset` are normalised so that
their bounding box fits inside a ball of radius ``ASSET_RADIUS``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from . import sdf
from .errors import EmptyAssetError, GeneratorError
from .io import format_floats

FORMAT_VERSION = 1
ASSET_RADIUS = 0.9
MIN_PART_FRACTION = 0.05
MAX_PARTS = 10
TEMPLATES = ("stack", "body+limbs", "vehicle", "table")


@dataclass(frozen=True, eq=False)
class PartPrimitive:
    kind: str
    rotation: np.ndarray  # (3, 3) local -> world
    translation: np.ndarray  # (3,)
    scale: np.ndarray  # (3,)
    albedo: np.ndarray  # (3,)

    def __post_init__(self):
        if self.kind not in sdf.KINDS:
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        for name in ("rotation", "translation", "scale", "albedo"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if np.any(self.scale <= 0):
            raise ValueError("primitive scale components must be positive")
        if not np.allclose(self.rotation @ self.rotation.T, np.eye(3), atol=1e-6):
            raise ValueError("primitive rotation is not orthonormal")
        if np.any(self.albedo < 0) or np.any(self.albedo > 1):
            raise ValueError("albedo components must lie in [0, 1]")

    def distance(self, points: np.ndarray) -> np.ndarray:
        local = (points - self.translation) @ self.rotation
        return sdf.primitive_sdf(self.kind, local, self.scale)

    def bounding_radius(self) -> float:
        return sdf.bounding_radius(self.kind, self.scale)

    def transformed(self, rotation: np.ndarray, offset, factor: float = 1.0) -> "PartPrimitive":
        """Apply ``x -> factor * (rotation @ x) + offset`` to the primitive."""
        return PartPrimitive(
            kind=self.kind,
            rotation=rotation @ self.rotation,
            translation=factor * (rotation @ self.translation) + np.asarray(offset, dtype=float),
            scale=factor * self.scale,
            albedo=self.albedo,
        )


Part = tuple  # tuple[PartPrimitive, ...]


@dataclass(frozen=True, eq=False)
class Asset:
    id: str
    parts: tuple
    bounds: np.ndarray = field(default=None)  # (2, 3) min / max corners

    def __post_init__(self):
        parts = tuple(tuple(p) for p in self.parts)
        if not parts:
            raise ValueError("an asset needs at least one part")
        if any(not 1 <= len(p) <= 4 for p in parts):
            raise ValueError("a part is a union of 1 to 4 primitives")
        object.__setattr__(self, "parts", parts)
        if self.bounds is None:
            object.__setattr__(self, "bounds", conservative_bounds(parts))
        else:
            object.__setattr__(self, "bounds", np.asarray(self.bounds, dtype=np.float64))

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    def part_distance(self, k: int, points: np.ndarray) -> np.ndarray:
        prims = self.parts[k]
        d = prims[0].distance(points)
        for prim in prims[1:]:
            d = np.minimum(d, prim.distance(points))
        return d

    def part_albedo(self, k: int, points: np.ndarray) -> np.ndarray:
        """Albedo of the nearest primitive of part ``k`` at each point."""
        prims = self.parts[k]
        if len(prims) == 1:
            return np.broadcast_to(prims[0].albedo, points.shape[:-1] + (3,)).copy()
        d = np.stack([prim.distance(points) for prim in prims])
        albedos = np.stack([prim.albedo for prim in prims])
        return albedos[np.argmin(d, axis=0)]

    def part_distances(self, points: np.ndarray) -> np.ndarray:
        """Per-part distances, shape ``(S,) + points.shape[:-1]``."""
        return np.stack([self.part_distance(k, points) for k in range(self.n_parts)])

    def radius(self) -> float:
        return float(np.linalg.norm(np.abs(self.bounds).max(axis=0)))

    def subset(self, keep: Sequence[int], new_id: str | None = None) -> "Asset":
        """Asset with only the listed parts, keeping the original bounds."""
        return Asset(new_id or self.id, tuple(self.parts[k] for k in keep), self.bounds)

    def transformed(self, rotation: np.ndarray, new_id: str | None = None) -> "Asset":
        """Rigidly rotate the asset about the origin (bounds recomputed)."""
        rotation = np.asarray(rotation, dtype=float)
        parts = tuple(tuple(p.transformed(rotation, np.zeros(3)) for p in part) for part in self.parts)
        return Asset(new_id or self.id, parts)

    # serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        parts = []
        for part in self.parts:
            prims = []
            for prim in part:
                quat = Rotation.from_matrix(prim.rotation).as_quat(canonical=True)
                prims.append(
                    {
                        "kind": prim.kind,
                        "quaternion_xyzw": quat.tolist(),
                        "translation": prim.translation.tolist(),
                        "scale": prim.scale.tolist(),
                        "albedo": prim.albedo.tolist(),
                    }
                )
            parts.append(prims)
        doc = {
            "format": "partbench-asset",
            "version": FORMAT_VERSION,
            "id": self.id,
            "bounds": self.bounds.tolist(),
            "parts": parts,
        }
        return format_floats(doc)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "Asset":
        if doc.get("format") != "partbench-asset" or doc.get("version") != FORMAT_VERSION:
            raise ValueError("not a version-1 partbench asset document")
        parts = []
        for prims in doc["parts"]:
            part = []
            for p in prims:
                rot = Rotation.from_quat(p["quaternion_xyzw"]).as_matrix()
                part.append(PartPrimitive(p["kind"], rot, p["translation"], p["scale"], p["albedo"]))
            parts.append(tuple(part))
        return cls(doc["id"], tuple(parts), np.asarray(doc["bounds"]))

    @classmethod
    def loads(cls, text: str) -> "Asset":
        return cls.from_dict(json.loads(text))


def conservative_bounds(parts) -> np.ndarray:
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for part in parts:
        for prim in part:
            r = prim.bounding_radius()
            lo = np.minimum(lo, prim.translation - r)
            hi = np.maximum(hi, prim.translation + r)
    return np.stack([lo, hi])


def sdf_eval(asset: Asset, p):
    """Union SDF with part attribution.

    Returns ``(distance, part_index, albedo)``.  Accepts a single point of
    shape ``(3,)`` or a batch ``(N, 3)``; ties go to the lowest part index.
    """
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    d = asset.part_distances(pts)
    idx = np.argmin(d, axis=0)
    dist = np.take_along_axis(d, idx[None], axis=0)[0]
    albedo = np.empty(pts.shape[:-1] + (3,))
    for k in np.unique(idx):
        sel = idx == k
        albedo[sel] = asset.part_albedo(int(k), pts[sel])
    if single:
        return float(dist[0]), int(idx[0]), albedo[0]
    return dist, idx, albedo


# volume statistics ---------------------------------------------------------


def part_volume_fractions(asset: Asset, samples: int = 100_000, seed: int = 0) -> np.ndarray:
    """Monte-Carlo share of the union volume attributed to each part.

    Points inside the union are credited to the nearest-surface part, so
    the fractions sum to one.  The estimate depends only on ``seed``,
    ``samples`` and the asset bounds.
    """
    if samples < 10_000:
        raise ValueError("volume estimation needs at least 1e4 samples")
    counts, inside = _volume_counts(asset, samples, seed)
    if inside == 0:
        raise EmptyAssetError(f"asset {asset.id!r} has zero union volume")
    return counts / inside


def _volume_counts(asset: Asset, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    lo, hi = asset.bounds
    pts = rng.uniform(lo, hi, size=(samples, 3))
    d = asset.part_distances(pts)
    owner = np.argmin(d, axis=0)
    is_in = d.min(axis=0) < 0.0
    counts = np.bincount(owner[is_in], minlength=asset.n_parts).astype(np.float64)
    return counts, int(is_in.sum())


@dataclass(frozen=True)
class FilterResult:
    accepted: bool
    reason: str | None
    culled: tuple
    asset: Asset | None = None  # surviving parts, when accepted

    def __bool__(self):
        return self.accepted


def filter_asset(asset: Asset, fractions) -> FilterResult:
    """Cull parts under 5% of the volume, then reject >10-part or single-part assets."""
    fractions = np.asarray(fractions, dtype=float)
    if fractions.shape != (asset.n_parts,):
        raise ValueError("one volume fraction per part is required")
    culled = tuple(int(k) for k in np.flatnonzero(fractions < MIN_PART_FRACTION))
    keep = [k for k in range(asset.n_parts) if k not in culled]
    if len(keep) > MAX_PARTS:
        return FilterResult(False, "too-many-parts", culled)
    if len(keep) <= 1:
        return FilterResult(False, "monolithic", culled)
    kept = asset if not culled else asset.subset(keep)
    return FilterResult(True, None, culled, kept)


# generation ----------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    template: str | None = None  # None picks one at random per seed
    min_parts: int = 2
    max_parts: int = 8
    volume_samples: int = 100_000
    max_attempts: int = 20

    def validate(self):
        if not 2 <= self.min_parts <= self.max_parts <= MAX_PARTS:
            raise GeneratorError(f"part count range [{self.min_parts}, {self.max_parts}] not within [2, 10]")
        if self.template is not None and self.template not in TEMPLATES:
            raise GeneratorError(f"unknown template {self.template!r}")
        lo, hi = _TEMPLATE_RANGE[self.template] if self.template else (2, 8)
        if max(lo, self.min_parts) > min(hi, self.max_parts):
            raise GeneratorError(f"template {self.template!r} cannot produce {self.min_parts}-{self.max_parts} parts")


def _prim(kind, translation, scale, albedo, rotation=None):
    rot = np.eye(3) if rotation is None else rotation
    return PartPrimitive(kind, rot, np.asarray(translation, float), np.asarray(scale, float), albedo)


def _rot_x(deg):
    return Rotation.from_euler("x", deg, degrees=True).as_matrix()


def _rot_y(deg):
    return Rotation.from_euler("y", deg, degrees=True).as_matrix()


def _colour(rng):
    return rng.uniform(0.25, 0.95, size=3)


def _tpl_stack(n, rng):
    kinds = ["sphere", "sphere", "rounded-cone", "box"]
    parts = []
    z = 0.0
    for i in range(n):
        r = 0.32 * rng.uniform(0.8, 1.0)
        kind = kinds[int(rng.integers(len(kinds)))] if i else "sphere"
        if kind == "sphere":
            half_h = r
            scale = (r, r, r)
        elif kind == "rounded-cone":
            half_h = 0.5 * r + 0.8 * r
            scale = (0.8 * r, 0.6 * r, r)
        else:
            half_h = 0.7 * r
            scale = (0.8 * r, 0.8 * r, 0.7 * r)
        z += half_h if i else 0.0
        parts.append((_prim(kind, (0, 0, z), scale, _colour(rng)),))
        z += half_h * 0.85
    return parts


def _tpl_body_limbs(n, rng):
    colour_body = _colour(rng)
    body = (_prim("capsule", (0, 0, 0), (0.27, 0.27, 0.25 * rng.uniform(0.9, 1.1)), colour_body),)
    head = (_prim("sphere", (0, 0, 0.72), (0.24 * rng.uniform(0.9, 1.1),) * 3, _colour(rng)),)
    parts = [body, head]
    limb_r = 0.14
    slots = [
        ("capsule", (0.36, 0.0, 0.05), (limb_r, limb_r, 0.26), _rot_y(35)),  # right arm
        ("capsule", (-0.36, 0.0, 0.05), (limb_r, limb_r, 0.26), _rot_y(-35)),  # left arm
        ("capsule", (0.14, 0.0, -0.66), (limb_r, limb_r, 0.24), None),  # right leg
        ("capsule", (-0.14, 0.0, -0.66), (limb_r, limb_r, 0.24), None),  # left leg
        ("rounded-cone", (0.0, -0.36, -0.2), (0.17, 0.11, 0.34), _rot_x(60)),  # tail
        ("torus", (0, 0, 0.98), (0.2, 0.1, 0.1), None),  # halo / hat brim
    ]
    limb_colour = _colour(rng)
    for kind, pos, scale, rot in slots[: n - 2]:
        parts.append((_prim(kind, pos, scale, limb_colour, rot),))
    return parts


def _tpl_vehicle(n, rng):
    length = rng.uniform(0.58, 0.66)
    body = (_prim("box", (0, 0, 0), (length, 0.3, 0.12), _colour(rng)),)
    cabin = (_prim("box", (-0.08, 0, 0.22), (0.3, 0.25, 0.12), _colour(rng)),)
    wheel_colour = _colour(rng)
    wx, wy, wz = length * 0.62, 0.33, -0.12
    wheels = [
        _prim("capsule", (sx * wx, sy * wy, wz), (0.19, 0.19, 0.06), wheel_colour, _rot_x(90))
        for sx in (1, -1)
        for sy in (1, -1)
    ]
    spoiler = (_prim("box", (-length + 0.1, 0, 0.2), (0.12, 0.3, 0.1), _colour(rng)),)
    rack = (_prim("box", (-0.08, 0, 0.4), (0.28, 0.24, 0.07), _colour(rng)),)
    parts = [body, cabin]
    if n == 3:
        parts.append(tuple(wheels))
    elif n in (4, 5):
        parts += [tuple(wheels[:2]), tuple(wheels[2:])]
    elif n >= 6:
        parts += [(w,) for w in wheels]
    if n in (5, 7, 8):
        parts.append(spoiler)
    if n == 8:
        parts.append(rack)
    return parts


def _tpl_table(n, rng):
    hw, hd = rng.uniform(0.55, 0.7), rng.uniform(0.4, 0.5)
    top = (_prim("box", (0, 0, 0.45), (hw, hd, 0.055), _colour(rng)),)
    leg_colour = _colour(rng)
    lx, ly = hw - 0.1, hd - 0.1
    legs = [
        _prim("capsule", (sx * lx, sy * ly, 0.0), (0.1, 0.1, 0.4), leg_colour)
        for sx in (1, -1)
        for sy in (1, -1)
    ]
    shelf = (_prim("box", (0, 0, -0.12), (hw - 0.12, hd - 0.12, 0.04), _colour(rng)),)
    back = (_prim("box", (-hw + 0.1, 0, 0.8), (0.1, hd - 0.05, 0.3), _colour(rng)),)
    parts = [top]
    if n == 2:
        parts.append(tuple(legs))
    elif n in (3, 4):
        parts += [tuple(legs[:2]), tuple(legs[2:])]
    else:
        parts += [(leg,) for leg in legs]
    if n in (4, 6, 7):
        parts.append(shelf)
    if n == 7:
        parts.append(back)
    return parts


_TEMPLATE_FN = {
    "stack": _tpl_stack,
    "body+limbs": _tpl_body_limbs,
    "vehicle": _tpl_vehicle,
    "table": _tpl_table,
}
_TEMPLATE_RANGE = {
    "stack": (2, 6),
    "body+limbs": (2, 8),
    "vehicle": (2, 8),
    "table": (2, 7),
    None: (2, 8),
}


def tight_bounds(parts, resolution: int = 48) -> np.ndarray:
    """Axis-aligned box of the union's interior, padded by one grid cell."""
    lo, hi = conservative_bounds(parts)
    axes = [np.linspace(lo[i], hi[i], resolution) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    tmp = Asset("tmp", parts, np.stack([lo, hi]))
    inside = tmp.part_distances(grid).min(axis=0) <= 0.0
    if not inside.any():
        raise EmptyAssetError("generated geometry has no interior")
    cell = (hi - lo) / (resolution - 1)
    pts = grid[inside]
    return np.stack([np.maximum(pts.min(axis=0) - cell, lo), np.minimum(pts.max(axis=0) + cell, hi)])


def normalize_parts(parts):
    """Centre the parts' bounding box at the origin and scale it to ASSET_RADIUS."""
    lo, hi = tight_bounds(parts)
    centre = 0.5 * (lo + hi)
    factor = ASSET_RADIUS / (0.5 * np.linalg.norm(hi - lo))
    eye = np.eye(3)
    moved = tuple(
        tuple(prim.transformed(eye, -factor * centre, factor) for prim in part) for part in parts
    )
    bounds = np.stack([factor * (lo - centre), factor * (hi - centre)])
    return moved, bounds


def draw_template(seed: int, spec: GeneratorSpec = GeneratorSpec(), attempt: int = 0) -> Asset:
    """One raw template draw; no filtering."""
    spec.validate()
    rng = np.random.default_rng([seed, attempt])
    lo, hi = _TEMPLATE_RANGE[spec.template] if spec.template else (2, 8)
    lo, hi = max(lo, spec.min_parts), min(hi, spec.max_parts)
    n = int(rng.integers(lo, hi + 1))
    if spec.template is None:
        choices = [t for t in TEMPLATES if _TEMPLATE_RANGE[t][0] <= n <= _TEMPLATE_RANGE[t][1]]
        template = choices[int(rng.integers(len(choices)))]
    else:
        template = spec.template
    parts, bounds = normalize_parts(_TEMPLATE_FN[template](n, rng))
    return Asset(f"asset-{seed:06d}", parts, bounds)


def generate_asset(seed: int, spec: GeneratorSpec = GeneratorSpec()) -> Asset:
    """Deterministic asset for ``seed`` that passes :func:`filter_asset` without culls.

    Template draws are retried with a derived stream; if every attempt needs
    culling, the culled version of the first accepted draw is returned.
    """
    spec.validate()
    fallback = None
    for attempt in range(spec.max_attempts):
        asset = draw_template(seed, spec, attempt)
        fractions = part_volume_fractions(asset, spec.volume_samples, seed)
        result = filter_asset(asset, fractions)
        if result.accepted and not result.culled:
            return asset
        if result.accepted and fallback is None:
            fallback = result.asset
    if fallback is None:
        raise GeneratorError(f"no acceptable asset after {spec.max_attempts} attempts (seed {seed})")
    return fallback
