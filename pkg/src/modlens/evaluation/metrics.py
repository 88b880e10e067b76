"""Classification and rationale metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class RocCurve:
    """Threshold-sweep ROC points (fpr, tpr) and the trapezoidal AUC."""

    points: tuple[tuple[float, float], ...]
    auc: float

    def __post_init__(self):
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise ValueError("ROC must start at (0,0) and end at (1,1)")
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        if any(b < a for a, b in zip(xs, xs[1:])) or any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("ROC points must be monotone")


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise MetricError("scores and labels must be equal-length 1-D sequences")
    if not np.isin(y, (0, 1)).all():
        raise MetricError("labels must be 0/1")
    return s, y.astype(np.int64)


def roc_auc(scores, labels) -> RocCurve:
    """ROC over the unique-score threshold sweep; ties share one step."""
    s, y = _check_binary(scores, labels)
    pos = int(y.sum())
    neg = len(y) - pos
    if pos == 0 or neg == 0:
        raise MetricError("ROC needs both classes present")
    points = [(0.0, 0.0)]
    # Descending unique thresholds; at threshold t predict positive when
    # score >= t, so equal scores enter the curve as a single diagonal jump.
    order = np.argsort(-s, kind="stable")
    tp = fp = 0
    i = 0
    n = len(s)
    while i < n:
        j = i
        while j < n and s[order[j]] == s[order[i]]:
            tp += int(y[order[j]] == 1)
            fp += int(y[order[j]] == 0)
            j += 1
        points.append((fp / neg, tp / pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return RocCurve(points=tuple(points), auc=float(auc))


def mann_whitney_auc(scores, labels) -> float:
    """Brute-force pairwise statistic; the independent AUC oracle."""
    s, y = _check_binary(scores, labels)
    pos = s[y == 1]
    neg = s[y == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise MetricError("need both classes present")
    wins = (pos.reshape(-1, 1) > neg.reshape(1, -1)).sum()
    ties = (pos.reshape(-1, 1) == neg.reshape(1, -1)).sum()
    return float((wins + 0.5 * ties) / (len(pos) * len(neg)))


def average_precision(scores, labels) -> float:
    """Mean precision at the rank of each positive.

    Ranking is by descending score; equal scores keep their input order
    (stable sort), so ties are resolved deterministically and documented.
    """
    s, y = _check_binary(scores, labels)
    if y.sum() == 0:
        raise MetricError("average precision needs at least one positive")
    order = np.argsort(-s, kind="stable")
    hits = 0
    precisions = []
    for rank, idx in enumerate(order, start=1):
        if y[idx] == 1:
            hits += 1
            precisions.append(hits / rank)
    return float(np.mean(precisions))


def accuracy(predicted, labels) -> float:
    p = np.asarray(predicted)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise MetricError("predicted and labels must align")
    return float((p == y).mean())


@dataclass(frozen=True)
class RationaleReport:
    """Pooled selection quality over a gold-annotated comment set.

    precision and mean_segment_length are None when nothing was selected
    anywhere (undefined, deliberately distinct from 0).
    """

    precision: float | None
    selected_fraction: float
    mean_segment_length: float | None
    selected_total: int
    matched_total: int
    token_total: int


def _segments(z) -> list[int]:
    runs, current = [], 0
    for flag in z:
        if flag > 0.5:
            current += 1
        elif current:
            runs.append(current)
            current = 0
    if current:
        runs.append(current)
    return runs


def rationale_metrics(selections, gold_spans) -> RationaleReport:
    """Pooled precision / fraction / segment stats.

    ``selections``: per comment, a 0/1 sequence over its tokens.
    ``gold_spans``: per comment, the gold token-index collection; every
    evaluated comment must have one (evaluate only annotated comments).
    """
    if len(selections) != len(gold_spans):
        raise MetricError("selections and gold spans must align")
    if not selections:
        raise MetricError("nothing to evaluate")
    selected = matched = tokens = 0
    seg_lengths: list[int] = []
    for z, gold in zip(selections, gold_spans):
        gold = set(int(g) for g in gold)
        if not gold:
            raise MetricError("every evaluated comment needs gold spans")
        if max(gold) >= len(z):
            raise MetricError("gold span index out of range")
        picked = {t for t, flag in enumerate(z) if flag > 0.5}
        selected += len(picked)
        matched += len(picked & gold)
        tokens += len(z)
        seg_lengths.extend(_segments(z))
    return RationaleReport(
        precision=(matched / selected) if selected else None,
        selected_fraction=selected / tokens,
        mean_segment_length=(float(np.mean(seg_lengths)) if seg_lengths else None),
        selected_total=selected,
        matched_total=matched,
        token_total=tokens,
    )
