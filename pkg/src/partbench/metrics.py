"""Segmentation evaluation: smoothed IoU, greedy matching, AP, mAP, recall@K."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NoGroundTruthError

EPS = 1e-4
THRESHOLDS = (0.5, 0.75)


def _stack(masks) -> np.ndarray:
    masks = getattr(masks, "masks", masks)
    arr = np.asarray(masks, dtype=bool)
    if arr.ndim == 2:
        arr = arr[None]
    return arr


def iou(a, b, eps: float = EPS) -> float:
    """Smoothed IoU ``(|A & B| + eps) / (|A | B| + eps)``; two empty masks give 1."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("masks must share a resolution")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return (inter + eps) / (union + eps)


def iou_matrix(a, b, eps: float = EPS) -> np.ndarray:
    """Pairwise smoothed IoU between two mask stacks, shape (len(a), len(b))."""
    a, b = _stack(a), _stack(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    if a.shape[1:] != b.shape[1:]:
        raise ValueError("masks must share a resolution")
    fa = a.reshape(a.shape[0], -1).astype(np.float64)
    fb = b.reshape(b.shape[0], -1).astype(np.float64)
    inter = fa @ fb.T
    union = fa.sum(1)[:, None] + fb.sum(1)[None, :] - inter
    return (inter + eps) / (union + eps)


@dataclass(frozen=True)
class MatchResult:
    labels: tuple  # y_k in {0, 1}, one per ranked proposal
    matched: tuple  # gt index per proposal, -1 when unmatched
    tau: float


def greedy_match(ranked, gt, tau: float) -> MatchResult:
    """Match proposals in rank order to the best remaining ground-truth mask.

    The best remaining gt (by IoU, lowest index on ties) is found first and
    only then compared with ``tau``; a gt mask is consumed when matched.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    pred, gt = _stack(ranked), _stack(gt)
    n = pred.shape[0]
    if n == 0:
        return MatchResult((), (), tau)
    m = iou_matrix(pred, gt) if gt.shape[0] else np.zeros((n, 0))
    remaining = np.ones(gt.shape[0], dtype=bool)
    labels, matched = [], []
    for k in range(n):
        if not remaining.any():
            labels.append(0)
            matched.append(-1)
            continue
        scores = np.where(remaining, m[k], -np.inf)
        best = int(np.argmax(scores))
        if scores[best] >= tau:
            remaining[best] = False
            labels.append(1)
            matched.append(best)
        else:
            labels.append(0)
            matched.append(-1)
    return MatchResult(tuple(labels), tuple(matched), tau)


def average_precision(match, S: int) -> float:
    """``(1/S) * sum_k sum_{i<=k} y_i y_k / k``, evaluated in exact arithmetic."""
    if S <= 0:
        raise NoGroundTruthError("AP needs at least one ground-truth part")
    labels = match.labels if isinstance(match, MatchResult) else tuple(match)
    total = Fraction(0)
    hits = 0
    for k, y in enumerate(labels, start=1):
        hits += y
        if y:
            total += Fraction(hits, k)
    return float(total / S)


def sample_ap(ranked, gt, tau: float) -> float:
    gt = _stack(gt)
    return average_precision(greedy_match(ranked, gt, tau), gt.shape[0])


def mean_ap(aps) -> float:
    """Per-sample average of AP values."""
    aps = [float(a) for a in aps]
    if not aps:
        raise ValueError("mAP needs at least one sample")
    return float(np.mean(aps))


def recall_at_k(ranked, gt, tau: float, K: int) -> float:
    """Fraction of gt masks whose best IoU among the top ``K`` proposals exceeds ``tau``."""
    if K < 0:
        raise ValueError("K must be non-negative")
    pred, gt = _stack(ranked), _stack(gt)
    S = gt.shape[0]
    if S == 0:
        raise NoGroundTruthError("recall needs at least one ground-truth part")
    top = pred[:K]
    if top.shape[0] == 0:
        return 0.0
    best = iou_matrix(gt, top).max(axis=1)
    return float(np.count_nonzero(best > tau)) / S


def recall_curve(ranked, gt, tau: float, k_max: int) -> np.ndarray:
    """Recall at K for K = 0..k_max."""
    pred, gt = _stack(ranked), _stack(gt)
    if gt.shape[0] == 0:
        raise NoGroundTruthError("recall needs at least one ground-truth part")
    out = np.zeros(k_max + 1)
    if pred.shape[0] == 0:
        return out
    m = iou_matrix(gt, pred[:k_max])
    running = np.maximum.accumulate(m, axis=1) > tau
    counts = running.sum(axis=0) / gt.shape[0]
    out[1 : counts.size + 1] = counts
    out[counts.size + 1 :] = counts[-1]
    return out
