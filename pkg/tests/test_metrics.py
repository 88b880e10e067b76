"""Classification and rationale metrics against independent oracles."""

from __future__ import annotations

import numpy as np
import pytest

from modlens.evaluation import (
    MetricError, RationaleReport, RocCurve, accuracy, average_precision,
    mann_whitney_auc, rationale_metrics, roc_auc,
)


def test_roc_worked_example():
    curve = roc_auc([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
    assert curve.auc == pytest.approx(0.75, abs=1e-12)
    assert curve.points == ((0.0, 0.0), (0.0, 0.5), (0.5, 0.5),
                            (0.5, 1.0), (1.0, 1.0))


def test_roc_perfect_and_inverted():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]).auc == pytest.approx(1.0)
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]).auc == pytest.approx(0.0)


def test_roc_ties_share_one_step():
    # All scores equal: the curve is the single diagonal jump, AUC 0.5.
    curve = roc_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0])
    assert curve.points == ((0.0, 0.0), (1.0, 1.0))
    assert curve.auc == pytest.approx(0.5)


def test_roc_matches_mann_whitney_with_ties(rng):
    # Trapezoidal threshold-sweep AUC equals the pairwise statistic,
    # including tied scores (checked at 1e-9 over random instances).
    for trial in range(200):
        n = int(rng.integers(2, 100))
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        # Coarse grid forces plenty of ties.
        scores = rng.integers(0, 5, size=n) / 4.0
        assert abs(roc_auc(scores, labels).auc
                   - mann_whitney_auc(scores, labels)) < 1e-9


def test_roc_curve_validation():
    with pytest.raises(ValueError):
        RocCurve(points=((0.1, 0.0), (1.0, 1.0)), auc=0.5)
    with pytest.raises(ValueError):
        RocCurve(points=((0.0, 0.0), (0.5, 0.8), (0.4, 0.9), (1.0, 1.0)), auc=0.5)
    with pytest.raises(ValueError):
        RocCurve(points=((0.0, 0.0), (0.5, 0.8), (0.6, 0.7), (1.0, 1.0)), auc=0.5)


def test_roc_input_validation():
    with pytest.raises(MetricError):
        roc_auc([0.5, 0.6], [1, 1])
    with pytest.raises(MetricError):
        roc_auc([0.5], [1, 0])
    with pytest.raises(MetricError):
        roc_auc([0.5, 0.6], [1, 2])


def test_average_precision_worked_example():
    # Positives at ranks 1 and 3: (1/1 + 2/3) / 2.
    ap = average_precision([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
    assert ap == pytest.approx((1.0 + 2.0 / 3.0) / 2.0, abs=1e-12)


def test_average_precision_single_positive_last():
    n = 7
    scores = np.linspace(1.0, 0.1, n)
    labels = np.zeros(n, dtype=int)
    labels[-1] = 1
    assert average_precision(scores, labels) == pytest.approx(1.0 / n)


def test_average_precision_tie_stability():
    # Equal scores rank in input order (stable sort), so swapping two
    # tied entries changes the result deterministically, not randomly.
    a = average_precision([0.5, 0.5], [1, 0])
    b = average_precision([0.5, 0.5], [0, 1])
    assert a == pytest.approx(1.0)
    assert b == pytest.approx(0.5)


def test_average_precision_needs_a_positive():
    with pytest.raises(MetricError):
        average_precision([0.5, 0.4], [0, 0])


def test_average_precision_random_against_manual(rng):
    for _ in range(50):
        n = int(rng.integers(2, 40))
        labels = rng.integers(0, 2, size=n)
        if labels.sum() == 0:
            labels[0] = 1
        scores = rng.random(n)
        order = np.argsort(-scores, kind="stable")
        hits, precs = 0, []
        for rank, idx in enumerate(order, start=1):
            if labels[idx]:
                hits += 1
                precs.append(hits / rank)
        assert average_precision(scores, labels) == pytest.approx(np.mean(precs))


def test_accuracy():
    assert accuracy([1, 0, 1], [1, 1, 1]) == pytest.approx(2 / 3)
    with pytest.raises(MetricError):
        accuracy([1, 0], [1, 0, 1])


def test_permutation_invariance(rng):
    scores = rng.random(30)
    labels = rng.integers(0, 2, size=30)
    labels[0], labels[1] = 1, 0
    perm = rng.permutation(30)
    assert roc_auc(scores, labels).auc == pytest.approx(
        roc_auc(scores[perm], labels[perm]).auc, abs=1e-12)
    assert mann_whitney_auc(scores, labels) == pytest.approx(
        mann_whitney_auc(scores[perm], labels[perm]), abs=1e-12)


def test_rationale_worked_example():
    # One comment: z = [1,1,0,0,1], gold = {0,1}.
    report = rationale_metrics([[1, 1, 0, 0, 1]], [(0, 1)])
    assert report.precision == pytest.approx(2 / 3)
    assert report.selected_fraction == pytest.approx(0.6)
    assert report.mean_segment_length == pytest.approx(1.5)
    assert report.selected_total == 3
    assert report.matched_total == 2
    assert report.token_total == 5


def test_rationale_pooled_across_comments():
    report = rationale_metrics(
        [[1, 0, 0], [0, 1, 1, 0]],
        [(0,), (2,)])
    # Selected 3 of 7 tokens, matched 2 (index 0 and index 2).
    assert report.precision == pytest.approx(2 / 3)
    assert report.selected_fraction == pytest.approx(3 / 7)
    assert report.mean_segment_length == pytest.approx(1.5)


def test_rationale_empty_selection_undefined_precision():
    report = rationale_metrics([[0, 0, 0]], [(1,)])
    assert report.precision is None
    assert report.mean_segment_length is None
    assert report.selected_fraction == 0.0
    assert report.selected_total == 0


def test_rationale_recount_property(rng):
    # Pooled counts recomputed naively must match.
    selections, golds = [], []
    for _ in range(40):
        n = int(rng.integers(1, 12))
        selections.append(rng.integers(0, 2, size=n).tolist())
        k = int(rng.integers(1, n + 1))
        golds.append(tuple(rng.choice(n, size=k, replace=False).tolist()))
    report = rationale_metrics(selections, golds)
    sel = sum(sum(z) for z in selections)
    matched = sum(len({i for i, f in enumerate(z) if f} & set(g))
                  for z, g in zip(selections, golds))
    tokens = sum(len(z) for z in selections)
    assert report.selected_total == sel
    assert report.matched_total == matched
    assert report.token_total == tokens
    if sel:
        assert report.precision == pytest.approx(matched / sel)
    assert report.selected_fraction == pytest.approx(sel / tokens)


def test_rationale_error_paths():
    with pytest.raises(MetricError):
        rationale_metrics([[1, 0]], [])
    with pytest.raises(MetricError):
        rationale_metrics([], [])
    with pytest.raises(MetricError):
        rationale_metrics([[1, 0]], [()])
    with pytest.raises(MetricError):
        rationale_metrics([[1, 0]], [(5,)])
