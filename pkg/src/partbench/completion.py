"""Part completion: the request/result contract, three non-learned
completers, and the 25-channel conditioning block used to hand requests to
an external model.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .camera import grid_to_tiles, tiles_to_grid
from .errors import FormatError, PartbenchError

COMPLETERS = ("oracle", "passthrough", "symmetry")
LATENT_FACTOR = 8
LATENT_CHANNELS = 8
CONDITIONING_MAGIC = b"PBCB"
CONDITIONING_VERSION = 1
CHANNEL_ROLES = ("noise",) * 8 + ("masked-latent",) * 8 + ("context-latent",) * 8 + ("mask",)


@dataclass(eq=False)
class CompletionRequest:
    masked_image: np.ndarray  # (2H, 2W, 3), zero outside mask
    context_image: np.ndarray  # (2H, 2W, 3)
    mask: np.ndarray  # (2H, 2W) bool

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.masked_image.shape != self.context_image.shape or self.masked_image.shape[:2] != self.mask.shape:
            raise ValueError("request images and mask must share a resolution")
        if np.any(self.masked_image[~self.mask] != 0):
            raise ValueError("masked image must be zero outside the mask")

    @classmethod
    def from_image(cls, image: np.ndarray, mask: np.ndarray) -> "CompletionRequest":
        mask = np.asarray(mask, dtype=bool)
        return cls(np.where(mask[..., None], image, 0.0), image, mask)


@dataclass(eq=False)
class CompletionResult:
    image: np.ndarray
    foreground: np.ndarray
    completer: str
    seed: int = 0
    flags: tuple = field(default_factory=tuple)


def complete_oracle(req: CompletionRequest, gt_part_views, seed: int = 0) -> CompletionResult:
    """Return the ground-truth isolated part render ``(image, foreground)``."""
    if gt_part_views is None:
        raise PartbenchError("oracle completion needs the ground-truth part views", code="missing-ground-truth")
    image, fg = gt_part_views
    return CompletionResult(np.array(image, dtype=np.float64), np.array(fg, dtype=bool), "oracle", seed)


def complete_passthrough(req: CompletionRequest, seed: int = 0) -> CompletionResult:
    return CompletionResult(req.masked_image.copy(), req.mask.copy(), "passthrough", seed)


def _symmetry_tile(masked, context, mask):
    out = masked.copy()
    fg = mask.copy()
    if not mask.any():
        return out, fg
    occluder = context.any(axis=-1) & ~mask
    mirrored = mask[:, ::-1]
    take = occluder & mirrored
    out[take] = masked[:, ::-1][take]
    fg |= take
    holes = ndimage.binary_fill_holes(fg) & occluder & ~fg
    if holes.any():
        _, (rows, cols) = ndimage.distance_transform_edt(~mask, return_indices=True)
        out[holes] = masked[rows[holes], cols[holes]]
        fg |= holes
    return out, fg


def complete_symmetry(req: CompletionRequest, seed: int = 0) -> CompletionResult:
    """Mirror-and-fill heuristic, applied per tile.

    Occluded pixels (foreground of the context image outside the mask) are
    filled from their mirror image across the tile's vertical centre line
    when that mirror pixel is visible part evidence; occluded pixels left
    enclosed by the estimate take the colour of the nearest visible pixel.
    """
    if not req.mask.any():
        return CompletionResult(req.masked_image.copy(), req.mask.copy(), "symmetry", seed, ("no-evidence",))
    parts = [
        _symmetry_tile(m, c, k)
        for m, c, k in zip(grid_to_tiles(req.masked_image), grid_to_tiles(req.context_image), grid_to_tiles(req.mask))
    ]
    image = tiles_to_grid([p[0] for p in parts])
    fg = tiles_to_grid([p[1] for p in parts])
    return CompletionResult(image, fg, "symmetry", seed)


def complete(name: str, req: CompletionRequest, gt_part_views=None, seed: int = 0) -> CompletionResult:
    if name == "oracle":
        return complete_oracle(req, gt_part_views, seed)
    if name == "passthrough":
        return complete_passthrough(req, seed)
    if name == "symmetry":
        return complete_symmetry(req, seed)
    raise ValueError(f"unknown completer {name!r}; choose from {COMPLETERS}")


# conditioning block -------------------------------------------------------------


def _pseudo_latent(image: np.ndarray, factor: int) -> np.ndarray:
    h, w = image.shape[:2]
    pooled = image.reshape(h // factor, factor, w // factor, factor, 3).mean(axis=(1, 3))
    latent = np.zeros((LATENT_CHANNELS, h // factor, w // factor))
    latent[:3] = pooled.transpose(2, 0, 1)
    return latent


def pack_conditioning(req: CompletionRequest, factor: int = LATENT_FACTOR) -> np.ndarray:
    """25 x (2H/8) x (2W/8) float32 block: noise slot, masked latent, context latent, mask."""
    h, w = req.mask.shape
    if h % factor or w % factor:
        raise ValueError(f"resolution {h}x{w} not divisible by latent factor {factor}")
    block = np.zeros((25, h // factor, w // factor))
    block[8:16] = _pseudo_latent(req.masked_image, factor)
    block[16:24] = _pseudo_latent(req.context_image, factor)
    block[24] = req.mask.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))
    return block.astype(np.float32)


def conditioning_bytes(block: np.ndarray) -> bytes:
    c, h, w = block.shape
    header = struct.pack("<4sHHII", CONDITIONING_MAGIC, CONDITIONING_VERSION, c, h, w)
    return header + np.ascontiguousarray(block, dtype="<f4").tobytes()


def write_conditioning(path, block: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(conditioning_bytes(block))


def parse_conditioning(data: bytes):
    """Decode a conditioning file into ``(block, header)``."""
    if len(data) < 16:
        raise FormatError("conditioning file shorter than its header")
    magic, version, c, h, w = struct.unpack("<4sHHII", data[:16])
    if magic != CONDITIONING_MAGIC or version != CONDITIONING_VERSION:
        raise FormatError("not a version-1 conditioning block")
    if len(data) != 16 + 4 * c * h * w:
        raise FormatError("conditioning payload size does not match header")
    block = np.frombuffer(data[16:], dtype="<f4").reshape(c, h, w)
    header = {"version": version, "shape": (c, h, w), "roles": CHANNEL_ROLES[:c]}
    return block, header


def read_conditioning(path):
    with open(path, "rb") as fh:
        return parse_conditioning(fh.read())
