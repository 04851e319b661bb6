"""Colour-coded multi-view segmentation maps.

Parts are painted with palette colours chosen through a permutation; the
background is reserved black.  Decoding snaps every pixel to the nearest of
{black} + palette (Euclidean RGB) and discards colour regions smaller than
``min_pixels``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import TooManyPartsError

BACKGROUND = np.zeros(3)
LATTICE_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_Q = 16
DEFAULT_MIN_PIXELS = 10


@dataclass(frozen=True, eq=False)
class Palette:
    colors: np.ndarray  # (Q, 3)

    @property
    def Q(self) -> int:
        return self.colors.shape[0]


def _lattice() -> np.ndarray:
    pts = np.array(list(itertools.product(LATTICE_LEVELS, repeat=3)))
    return pts[np.any(pts > 0, axis=1)]


def make_palette(Q: int = DEFAULT_Q, seed: int = 0) -> Palette:
    """Farthest-point selection of ``Q`` colours from a 5-level RGB lattice.

    The first colour is a seed-chosen non-black lattice corner; each further
    colour maximises its Euclidean distance to those already taken (first
    lattice point on ties).  Lattice spacing guarantees pairwise L-inf
    separation of at least 0.25.
    """
    if not 2 <= Q <= 64:
        raise ValueError("palette size Q must lie in [2, 64]")
    lattice = _lattice()
    corners = np.flatnonzero(np.all((lattice == 0) | (lattice == 1), axis=1))
    rng = np.random.default_rng(seed)
    chosen = [int(corners[rng.integers(corners.size)])]
    nearest = np.linalg.norm(lattice - lattice[chosen[0]], axis=1)
    for _ in range(Q - 1):
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        nearest = np.minimum(nearest, np.linalg.norm(lattice - lattice[nxt], axis=1))
    return Palette(lattice[chosen].copy())


def random_permutation(Q: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(Q)


def encode(masks: np.ndarray, palette: Palette, perm) -> np.ndarray:
    """Paint mask ``k`` with ``palette.colors[perm[k]]`` on a black background."""
    masks = np.asarray(masks, dtype=bool)
    s = masks.shape[0]
    if s > palette.Q:
        raise TooManyPartsError(f"{s} parts but only {palette.Q} palette colours")
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(palette.Q)):
        raise ValueError("perm must be a permutation of range(Q)")
    if s and np.any(masks.sum(axis=0) > 1):
        raise ValueError("masks must be disjoint")
    out = np.zeros(masks.shape[1:] + (3,))
    for k in range(s):
        out[masks[k]] = palette.colors[perm[k]]
    return out


def quantize(seg: np.ndarray, palette: Palette) -> np.ndarray:
    """Per-pixel label: -1 for background, else palette index."""
    refs = np.concatenate([BACKGROUND[None], palette.colors])
    flat = np.asarray(seg, dtype=np.float64).reshape(-1, 3)
    d2 = ((flat[:, None, :] - refs[None]) ** 2).sum(-1)
    return (np.argmin(d2, axis=1) - 1).reshape(seg.shape[:-1])


def decode(seg: np.ndarray, palette: Palette, min_pixels: int = DEFAULT_MIN_PIXELS):
    """Masks recovered from a segmentation map, in palette order.

    Returns ``(masks, colour_ids)``; regions with fewer than ``min_pixels``
    pixels are dropped, so those pixels end up as background.
    """
    labels = quantize(seg, palette)
    masks, ids = [], []
    for q in range(palette.Q):
        m = labels == q
        if m.sum() >= min_pixels and m.any():
            masks.append(m)
            ids.append(q)
    if masks:
        return np.stack(masks), ids
    return np.zeros((0,) + labels.shape, dtype=bool), ids
