"""Token sequences to embedding matrices via hashed n-gram buckets."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..autodiff import Tensor, embed_mean, parameter
from .ngrams import EmbeddingConfig, NgramHasher


def init_embedding_table(cfg: EmbeddingConfig, seed: int, scale: float = 1e-3) -> Tensor:
    """Trainable bucket table, buckets x dim, small random init.

    The init scale stays far below the magnitude trained rows reach, so
    n-grams never seen in training (garbled text hashes to fresh buckets)
    contribute near-nothing to a token's mean instead of random noise.
    """
    rng = np.random.default_rng(seed)
    return parameter(rng.normal(0.0, scale, size=(cfg.buckets, cfg.dim)))


def embed_tokens(tokens: Sequence[str], table: Tensor, hasher: NgramHasher) -> Tensor:
    """K x d matrix: each row the mean of the token's n-gram bucket rows."""
    if not tokens:
        raise ValueError("cannot embed an empty token sequence")
    if table.data.shape != (hasher.cfg.buckets, hasher.cfg.dim):
        raise ValueError(
            f"table shape {table.data.shape} != (buckets, dim) "
            f"({hasher.cfg.buckets}, {hasher.cfg.dim})")
    return embed_mean(table, [hasher.buckets(tok) for tok in tokens])


def embed_step(token_per_row: Sequence[str | None], table: Tensor,
               hasher: NgramHasher) -> Tensor:
    """B x d matrix for one time step of a padded batch.

    Rows whose token is None (padding) come out zero and get no gradient.
    """
    ids = [hasher.buckets(tok) if tok is not None else np.empty(0, dtype=np.int64)
           for tok in token_per_row]
    return embed_mean(table, ids)


def drop_ngrams(ids: np.ndarray, rate: float,
                rng: np.random.Generator) -> np.ndarray:
    """Surviving subset of one token's n-gram ids under random dropout.

    Callers zero the dropped share out of the token's mean embedding, so
    training sees tokens the way garbled text arrives at inference: part
    of the n-grams recognizable, the rest contributing nothing. Always
    keeps at least one id; a real token never loses every n-gram.
    """
    if ids.size <= 1:
        return ids
    keep = rng.random(ids.size) >= rate
    if not keep.any():
        keep[rng.integers(ids.size)] = True
    return ids[keep]
