"""Multi-view mask proposals: a seeded noisy-oracle sampler, reliability
scoring, ranking with duplicate suppression, and seed-point queries.

The sampler stands in for repeated runs of a stochastic segmenter: each run
perturbs the ground-truth masks by merging touching parts, dropping parts
and morphing boundaries.  Run ``r`` of seed ``s`` uses its own stream
``default_rng([s, r])`` so adding runs never changes earlier ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .io import rle_decode, rle_encode
from .metrics import iou_matrix

DUPLICATE_IOU = 0.5
_CROSS = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class NoiseSpec:
    merge: float = 0.0
    drop: float = 0.0
    morph_radius: int = 0
    runs: int = 1

    def __post_init__(self):
        if not (0.0 <= self.merge <= 1.0 and 0.0 <= self.drop <= 1.0):
            raise ValueError("noise probabilities must lie in [0, 1]")
        if self.morph_radius < 0 or self.runs < 0:
            raise ValueError("morph radius and run count must be non-negative")


@dataclass(eq=False)
class ProposalSet:
    masks: np.ndarray  # (N, H, W) bool
    runs: np.ndarray  # (N,) sampler run index
    slots: np.ndarray  # (N,) position within the run

    def __len__(self):
        return self.masks.shape[0]

    @classmethod
    def empty(cls, shape):
        return cls(np.zeros((0,) + tuple(shape), dtype=bool), np.zeros(0, int), np.zeros(0, int))

    @classmethod
    def from_masks(cls, masks, runs=None):
        masks = np.asarray(masks, dtype=bool)
        n = masks.shape[0]
        runs = np.zeros(n, int) if runs is None else np.asarray(runs, int)
        slots = np.zeros(n, int)
        for r in np.unique(runs):
            sel = np.flatnonzero(runs == r)
            slots[sel] = np.arange(sel.size)
        return cls(masks, runs, slots)


@dataclass(eq=False)
class RankedProposals:
    masks: np.ndarray
    scores: np.ndarray
    runs: np.ndarray = field(default=None)
    slots: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.masks.shape[0]
        if self.runs is None:
            self.runs = np.zeros(n, int)
        if self.slots is None:
            self.slots = np.arange(n)

    def __len__(self):
        return self.masks.shape[0]

    def subset(self, keep) -> "RankedProposals":
        keep = np.asarray(keep, dtype=int)
        return RankedProposals(self.masks[keep], self.scores[keep], self.runs[keep], self.slots[keep])

    def to_dict(self) -> dict:
        return {
            "format": "partbench-proposals",
            "version": 1,
            "size": list(self.masks.shape[1:]),
            "proposals": [
                {"score": int(s), "run": int(r), "slot": int(k), "rle": rle_encode(m)}
                for m, s, r, k in zip(self.masks, self.scores, self.runs, self.slots)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RankedProposals":
        """Load a proposal file; external files may omit run/slot fields.

        Entries are kept in file order, which is taken as the ranking.
        """
        items = doc["proposals"]
        size = tuple(doc["size"])
        if not items:
            return cls(np.zeros((0,) + size, bool), np.zeros(0, int))
        masks = np.stack([rle_decode(p["rle"]) for p in items])
        scores = np.array([p.get("score", 0) for p in items])
        runs = np.array([p.get("run", 0) for p in items])
        slots = np.array([p.get("slot", i) for i, p in enumerate(items)])
        return cls(masks, scores, runs, slots)


def _adjacent_pairs(masks: np.ndarray):
    pairs = []
    grown = [ndimage.binary_dilation(m, _CROSS) for m in masks]
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if np.any(grown[i] & masks[j]):
                pairs.append((i, j))
    return pairs


def _morph(mask: np.ndarray, amount: int) -> np.ndarray:
    if amount > 0:
        return ndimage.binary_dilation(mask, _CROSS, iterations=amount)
    if amount < 0:
        return ndimage.binary_erosion(mask, _CROSS, iterations=-amount)
    return mask.copy()


def _sample_run(gt: np.ndarray, pairs, noise: NoiseSpec, rng) -> list:
    n = gt.shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    merge_draws = rng.random(len(pairs))
    for (i, j), u in zip(pairs, merge_draws):
        if u < noise.merge:
            a, b = find(i), find(j)
            parent[max(a, b)] = min(a, b)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    members = [groups[r] for r in sorted(groups)]
    drop_draws = rng.random(len(members))
    sizes = rng.integers(0, noise.morph_radius + 1, size=len(members))
    signs = rng.choice((-1, 1), size=len(members))
    out = []
    for group, u, size, sign in zip(members, drop_draws, sizes, signs):
        if u < noise.drop:
            continue
        mask = np.any(gt[group], axis=0)
        out.append(_morph(mask, int(size * sign)))
    return out


def sample_noisy_oracle(gt_masks, noise: NoiseSpec, seed: int) -> ProposalSet:
    """Perturbed copies of the ground-truth masks, one batch per sampler run."""
    gt = np.asarray(gt_masks, dtype=bool)
    pairs = _adjacent_pairs(gt) if noise.merge > 0 else []
    masks, runs = [], []
    for r in range(noise.runs):
        rng = np.random.default_rng([seed, r])
        batch = _sample_run(gt, pairs, noise, rng)
        masks += batch
        runs += [r] * len(batch)
    if not masks:
        return ProposalSet.empty(gt.shape[1:])
    return ProposalSet.from_masks(np.stack(masks), runs)


def reliability_scores(P: ProposalSet) -> np.ndarray:
    """How many proposals (itself included) overlap each proposal by IoU > 1/2."""
    if len(P) == 0:
        return np.zeros(0, dtype=int)
    return (iou_matrix(P.masks, P.masks) > 0.5).sum(axis=1)


def reliability_score(mask, P: ProposalSet) -> int:
    if len(P) == 0:
        return 0
    return int((iou_matrix(np.asarray(mask)[None], P.masks)[0] > 0.5).sum())


def rank_and_dedup(P: ProposalSet, scores=None) -> RankedProposals:
    """Sort by decreasing score and greedily drop near-duplicates.

    Ties keep provenance order (run, then slot).  A proposal survives only
    if its IoU with every survivor above it is below 1/2.  ``scores`` may
    be passed for externally scored proposals.
    """
    if len(P) == 0:
        return RankedProposals(P.masks.copy(), np.zeros(0, int), np.zeros(0, int), np.zeros(0, int))
    scores = reliability_scores(P) if scores is None else np.asarray(scores)
    order = np.lexsort((P.slots, P.runs, -scores))
    m = iou_matrix(P.masks, P.masks)
    kept = []
    for i in order:
        if all(m[i, j] < DUPLICATE_IOU for j in kept):
            kept.append(int(i))
    kept = np.array(kept, dtype=int)
    return RankedProposals(P.masks[kept], scores[kept], P.runs[kept], P.slots[kept])


def seeded_query(ranked: RankedProposals, u) -> RankedProposals:
    """Ranked proposals that contain pixel ``u = (row, col)``, order preserved."""
    r, c = int(u[0]), int(u[1])
    h, w = ranked.masks.shape[1:]
    if not (0 <= r < h and 0 <= c < w):
        raise ValueError(f"seed pixel {u} outside the {h}x{w} grid")
    return ranked.subset(np.flatnonzero(ranked.masks[:, r, c]))


def seed_point(mask: np.ndarray):
    """Most interior pixel of a mask (max distance to its border), row-major first."""
    dist = ndimage.distance_transform_edt(np.pad(mask, 1))[1:-1, 1:-1]
    return tuple(int(v) for v in np.unravel_index(int(np.argmax(dist)), mask.shape))
