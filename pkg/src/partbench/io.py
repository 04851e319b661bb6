"""File formats shared by the pipeline stages.

* JSON documents with floats rounded to 9 significant digits
* 8-bit RGB PNG and bilevel mask PNG (Pillow)
* PFM depth / visibility maps, little-endian float32, ``inf`` stored as 1e30
* run-length encoded masks (row-major, first run counts background pixels)
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
from PIL import Image

PFM_INF = 1e30


def _round_sig(x: float, digits: int) -> float:
    if not np.isfinite(x) or x == 0.0:
        return float(x)
    return float(f"{x:.{digits}g}")


def format_floats(obj, digits: int = 9):
    """Recursively round every float in a JSON-like structure."""
    if isinstance(obj, float):
        return _round_sig(obj, digits)
    if isinstance(obj, np.floating):
        return _round_sig(float(obj), digits)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: format_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [format_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return format_floats(obj.tolist(), digits)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(format_floats(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj))
    return path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# images ----------------------------------------------------------------------


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_png(path, img: np.ndarray) -> Path:
    """Save an ``(H, W, 3)`` float image in [0, 1] as 8-bit RGB."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(img), mode="RGB").save(path, optimize=False)
    return path


def load_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def save_mask_png(path, mask: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(mask, dtype=bool)).save(path)
    return path


def load_mask_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("1"), dtype=bool)


# PFM ---------------------------------------------------------------------------


def write_pfm(path, data: np.ndarray) -> Path:
    """Write a greyscale (H, W) or colour (H, W, 3) PFM, little-endian."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        header = b"Pf"
    elif data.ndim == 3 and data.shape[2] == 3:
        header = b"PF"
    else:
        raise ValueError("PFM holds (H, W) or (H, W, 3) arrays")
    out = np.where(np.isposinf(data), PFM_INF, data).astype("<f4")
    h, w = data.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(header + b"\n" + f"{w} {h}\n".encode() + b"-1.0\n")
        fh.write(np.flipud(out).tobytes())  # PFM rows run bottom to top
    return path


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        kind = fh.readline().strip()
        w, h = (int(v) for v in fh.readline().split())
        scale = float(fh.readline())
        raw = fh.read()
    channels = {b"Pf": 1, b"PF": 3}.get(kind)
    if channels is None:
        raise ValueError(f"{os.fspath(path)}: not a PFM file")
    dtype = "<f4" if scale < 0 else ">f4"
    arr = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    arr = arr.reshape((h, w, 3) if channels == 3 else (h, w))
    arr = np.flipud(arr).copy()
    arr[arr >= PFM_INF] = np.inf
    return arr


# RLE -----------------------------------------------------------------------------


def rle_encode(mask: np.ndarray) -> dict:
    mask = np.asarray(mask, dtype=bool)
    flat = mask.ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate([[0], change, [flat.size]])
    counts = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        counts = [0] + counts
    return {"size": list(mask.shape), "counts": counts}


def rle_decode(rle: dict) -> np.ndarray:
    h, w = rle["size"]
    counts = np.asarray(rle["counts"], dtype=np.int64)
    if counts.sum() != h * w:
        raise ValueError("RLE counts do not cover the mask")
    values = np.arange(counts.size) % 2 == 1
    return np.repeat(values, counts).reshape(h, w)
