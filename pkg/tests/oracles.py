"""Slow, independent reference implementations used as test oracles."""

from fractions import Fraction

import numpy as np


def pixel_set(mask):
    return {(int(r), int(c)) for r, c in zip(*np.nonzero(mask))}


def set_iou(a, b, eps=Fraction(1, 10_000)):
    A, B = pixel_set(a), pixel_set(b)
    return (len(A & B) + eps) / (len(A | B) + eps)


def brute_ap(ranked, gt, tau):
    """Greedy match in rank order, then AP = (1/S) sum_k precision@k * y_k."""
    tau = Fraction(tau).limit_denominator(10_000)
    free = list(range(len(gt)))
    labels = []
    for p in ranked:
        if not free:
            labels.append(0)
            continue
        scored = [(set_iou(p, gt[j]), -j) for j in free]
        best_iou, neg_j = max(scored)
        if best_iou >= tau:
            free.remove(-neg_j)
            labels.append(1)
        else:
            labels.append(0)
    total = Fraction(0)
    for k in range(1, len(labels) + 1):
        if labels[k - 1]:
            total += Fraction(sum(labels[:k]), k)
    return total / len(gt), labels


def brute_recall(ranked, gt, tau, K):
    tau = Fraction(tau).limit_denominator(10_000)
    hit = sum(1 for g in gt if any(set_iou(p, g) > tau for p in ranked[:K]))
    return Fraction(hit, len(gt))


def random_instance(rng, size=16, max_gt=5, max_pred=8):
    """Blocky random masks; predictions are perturbed gt masks or noise."""
    s = int(rng.integers(1, max_gt + 1))
    labels = rng.integers(0, s + 1, size=(size // 4, size // 4)).repeat(4, 0).repeat(4, 1)
    gt = [labels == k + 1 for k in range(s)]
    n = int(rng.integers(0, max_pred + 1))
    pred = []
    for _ in range(n):
        if rng.random() < 0.7:
            base = gt[int(rng.integers(s))].copy()
            flip = rng.random((size, size)) < rng.uniform(0, 0.3)
            pred.append(base ^ (flip & (rng.random((size, size)) < 0.5)))
        else:
            pred.append(rng.random((size, size)) < rng.uniform(0.05, 0.5))
    return pred, gt
