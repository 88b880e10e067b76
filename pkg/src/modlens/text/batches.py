"""Class-balanced batching with minority supersampling."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .corpus import Comment, CorpusError


def balanced_batches(train: list[Comment], batch_size: int, seed: int) -> Iterator[list[Comment]]:
    """Yield batches holding equal counts of each class.

    One epoch walks every majority-class comment exactly once; minority
    comments are drawn with replacement (supersampled) to fill each
    batch's other half. When classes are already balanced this reduces to
    plain shuffling of both. Deterministic for a fixed seed.
    """
    if batch_size < 2 or batch_size % 2:
        raise CorpusError(f"batch_size must be even and >= 2, got {batch_size}")
    pos = [c for c in train if c.is_inappropriate]
    neg = [c for c in train if not c.is_inappropriate]
    if not pos or not neg:
        raise CorpusError("balanced batching needs both classes in the training set")
    rng = np.random.default_rng(seed)
    half = batch_size // 2

    if len(pos) >= len(neg):
        majority, minority = pos, neg
    else:
        majority, minority = neg, pos
    maj_order = rng.permutation(len(majority))
    equal = len(majority) == len(minority)
    min_order = rng.permutation(len(minority)) if equal else None

    for lo in range(0, len(majority), half):
        chunk = maj_order[lo: lo + half]
        if equal:
            minor = [minority[i] for i in min_order[lo: lo + len(chunk)]]
        else:
            minor = [minority[i] for i in rng.integers(0, len(minority), size=len(chunk))]
        batch = [majority[i] for i in chunk] + minor
        order = rng.permutation(len(batch))
        yield [batch[i] for i in order]
