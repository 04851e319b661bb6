"""Analytic signed distance functions for the part primitives.

All functions take points of shape ``(..., 3)`` expressed in the primitive's
local frame and return distances of shape ``(...,)``.  Formulas follow the
usual Inigo Quilez reference shapes; capsules and rounded cones are aligned
with the local +z axis and centred on the origin.
"""

from __future__ import annotations

import numpy as np

KINDS = ("sphere", "box", "capsule", "torus", "rounded-cone")


def sd_sphere(p: np.ndarray, radius: float) -> np.ndarray:
    return np.linalg.norm(p, axis=-1) - radius


def sd_box(p: np.ndarray, half: np.ndarray) -> np.ndarray:
    q = np.abs(p) - half
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(q.max(axis=-1), 0.0)
    return outside + inside


def sd_capsule(p: np.ndarray, radius: float, half_length: float) -> np.ndarray:
    """Capsule whose core segment runs from z=-half_length to z=+half_length."""
    q = p.copy()
    q[..., 2] -= np.clip(q[..., 2], -half_length, half_length)
    return np.linalg.norm(q, axis=-1) - radius


def sd_torus(p: np.ndarray, major: float, minor: float) -> np.ndarray:
    """Torus lying in the local xy plane."""
    ring = np.hypot(p[..., 0], p[..., 1]) - major
    return np.hypot(ring, p[..., 2]) - minor


def sd_rounded_cone(p: np.ndarray, r1: float, r2: float, height: float) -> np.ndarray:
    """Rounded cone with a sphere of radius r1 at z=-h/2 and r2 at z=+h/2.

    Requires ``|r1 - r2| < height``.
    """
    b = (r1 - r2) / height
    a = np.sqrt(1.0 - b * b)
    qx = np.hypot(p[..., 0], p[..., 1])
    qy = p[..., 2] + 0.5 * height
    k = -b * qx + a * qy
    side = qx * a + qy * b - r1
    bottom = np.hypot(qx, qy) - r1
    top = np.hypot(qx, qy - height) - r2
    return np.where(k < 0.0, bottom, np.where(k > a * height, top, side))


def primitive_sdf(kind: str, p: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Dispatch on primitive kind.

    Scale conventions: sphere uses ``scale[0]`` as radius; box uses the
    three half-extents; capsule uses ``scale[0]`` radius and ``scale[2]``
    half-length; torus uses ``scale[0]`` major and ``scale[1]`` minor radius;
    rounded cone uses ``scale[0]``/``scale[1]`` as bottom/top radii and
    ``scale[2]`` as height.
    """
    if kind == "sphere":
        return sd_sphere(p, scale[0])
    if kind == "box":
        return sd_box(p, np.asarray(scale))
    if kind == "capsule":
        return sd_capsule(p, scale[0], scale[2])
    if kind == "torus":
        return sd_torus(p, scale[0], scale[1])
    if kind == "rounded-cone":
        return sd_rounded_cone(p, scale[0], scale[1], scale[2])
    raise ValueError(f"unknown primitive kind {kind!r}")


def bounding_radius(kind: str, scale: np.ndarray) -> float:
    """Radius of a local-origin ball that contains the primitive."""
    if kind == "sphere":
        return float(scale[0])
    if kind == "box":
        return float(np.linalg.norm(scale))
    if kind == "capsule":
        return float(scale[0] + scale[2])
    if kind == "torus":
        return float(scale[0] + scale[1])
    if kind == "rounded-cone":
        return float(0.5 * scale[2] + max(scale[0], scale[1]))
    raise ValueError(f"unknown primitive kind {kind!r}")
