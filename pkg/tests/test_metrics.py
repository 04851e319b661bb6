from fractions import Fraction

import numpy as np
import pytest

from oracles import brute_ap, brute_recall, random_instance, set_iou
from partbench.errors import NoGroundTruthError
from partbench.metrics import (
    average_precision,
    greedy_match,
    iou,
    iou_matrix,
    mean_ap,
    recall_at_k,
    recall_curve,
    sample_ap,
)


def test_iou_smoothing():
    e = np.zeros((4, 4), bool)
    assert iou(e, e) == 1.0
    a = e.copy()
    a[0, 0] = True
    assert iou(a, e) == pytest.approx(1e-4 / (1 + 1e-4))
    assert iou(a, a) == 1.0


def test_iou_matrix_matches_set_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        pred, gt = random_instance(rng)
        if not pred:
            continue
        m = iou_matrix(np.array(pred), np.array(gt))
        ref = np.array([[float(set_iou(p, g)) for g in gt] for p in pred])
        assert np.allclose(m, ref, rtol=0, atol=1e-12)


@pytest.mark.parametrize("labels,S,expected", [((0, 1), 1, 0.5), ((1, 1), 2, 1.0), ((1, 0, 1), 2, (1 + 2 / 3) / 2), ((), 3, 0.0)])
def test_hand_computed_ap(labels, S, expected):
    assert average_precision(labels, S) == pytest.approx(expected, rel=0, abs=1e-15)


def test_ap_requires_ground_truth():
    with pytest.raises(NoGroundTruthError):
        average_precision((1,), 0)


def test_greedy_takes_best_gt_not_first_above_threshold():
    gt = np.zeros((2, 1, 20), bool)
    gt[0, 0, 10:15] = True  # IoU 1/3 with the proposal
    gt[1, 0, :10] = True  # IoU 2/3
    pred = np.zeros((1, 1, 20), bool)
    pred[0, 0, :15] = True
    r = greedy_match(pred, gt, 0.3)
    assert r.labels == (1,) and r.matched == (1,)


def test_matched_gt_is_consumed():
    gt = np.zeros((1, 2, 2), bool)
    gt[0, 0] = True
    r = greedy_match(np.stack([gt[0], gt[0]]), gt, 0.5)
    assert r.labels == (1, 0) and r.matched == (0, -1)


def test_against_brute_force_oracle():
    rng = np.random.default_rng(42)
    for _ in range(200):
        pred, gt = random_instance(rng)
        for tau in (0.5, 0.75):
            ref, labels = brute_ap(pred, gt, tau)
            got = greedy_match(np.array(pred) if pred else np.zeros((0, 16, 16), bool), np.array(gt), tau)
            assert list(got.labels) == labels
            assert average_precision(got, len(gt)) == float(ref)
            for K in (0, 1, 3, 8):
                assert recall_at_k(np.array(pred).reshape(-1, 16, 16), np.array(gt), tau, K) == float(
                    brute_recall(pred, gt, tau, K)
                )


def test_recall_monotone():
    rng = np.random.default_rng(3)
    for _ in range(50):
        pred, gt = random_instance(rng)
        pred = np.array(pred).reshape(-1, 16, 16)
        lo, hi = recall_curve(pred, np.array(gt), 0.5, 10), recall_curve(pred, np.array(gt), 0.75, 10)
        assert np.all(np.diff(lo) >= 0) and np.all(hi <= lo)


def test_mean_ap():
    assert mean_ap([1.0, 0.5]) == 0.75
    with pytest.raises(ValueError):
        mean_ap([])
    gt = np.ones((1, 2, 2), bool)
    assert sample_ap(gt, gt, 0.75) == 1.0
