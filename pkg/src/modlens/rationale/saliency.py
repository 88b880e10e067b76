"""First-derivative saliency baseline.

Scores each token by the L2 norm of the gradient of the predicted-class
probability with respect to that token's embedding row. Thresholding the
top fraction gives a selection to compare rationales against at matched
length.
"""

from __future__ import annotations

import numpy as np

from ..autodiff import parameter, slice_cols, zero_grads
from ..models.classifier import ClassifierModel, classify_hidden
from ..models.encoder import encode


def saliency_scores(model: ClassifierModel, tokens) -> np.ndarray:
    """Per-token nonnegative scores for one comment."""
    if not tokens:
        raise ValueError("cannot score an empty comment")
    table = model.params["emb.table"].data
    rows = []
    for tok in tokens:
        ids = model.hasher.buckets(tok)
        rows.append(table[ids].mean(axis=0) if len(ids) else np.zeros(table.shape[1]))
    x = parameter(np.stack(rows))
    hidden = encode(x, model.params, model.encoder, "enc.")
    dist = classify_hidden(hidden, model.params, model.encoder, "head.")
    predicted = int(np.argmax(dist.data[0]))
    zero_grads(model.params.values())
    slice_cols(dist, predicted, predicted + 1).backward()
    scores = np.linalg.norm(x.grad, axis=1)
    zero_grads(model.params.values())
    return scores


def select_top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """0/1 selection of the k highest scores; ties broken by position."""
    n = len(scores)
    k = max(0, min(k, n))
    z = np.zeros(n)
    if k:
        order = np.lexsort((np.arange(n), -scores))
        z[order[:k]] = 1.0
    return z


def select_fraction(scores: np.ndarray, fraction: float) -> np.ndarray:
    """Top round(fraction * K) scores, at least one when fraction > 0."""
    n = len(scores)
    k = int(round(fraction * n))
    if fraction > 0:
        k = max(1, k)
    return select_top_k(scores, k)
