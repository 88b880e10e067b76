"""Hashed character n-gram buckets for subword embeddings.

Tokens are wrapped in boundary markers ("<" and ">") and every character
n-gram with length in [min_n, max_n] is hashed into a fixed bucket range
with 64-bit FNV-1a. The hash is pure arithmetic on UTF-8 bytes, so bucket
indices are identical across runs, platforms and interpreters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class EmbeddingConfig:
    """Dimension, n-gram length range and hash bucket count."""

    dim: int = 100
    min_n: int = 3
    max_n: int = 5
    buckets: int = 2 ** 14

    def __post_init__(self):
        if self.min_n > self.max_n:
            raise ValueError(f"min_n {self.min_n} > max_n {self.max_n}")
        if self.min_n < 1:
            raise ValueError("min_n must be >= 1")
        if self.buckets < 1:
            raise ValueError("bucket count must be >= 1")
        if self.dim < 1:
            raise ValueError("embedding dimension must be >= 1")


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def char_ngrams(token: str, min_n: int, max_n: int) -> list[str]:
    """All boundary-marked character n-grams, duplicates preserved."""
    marked = f"<{token}>"
    grams: list[str] = []
    for n in range(min_n, max_n + 1):
        grams.extend(marked[i:i + n] for i in range(len(marked) - n + 1))
    return grams


def hash_ngrams(token: str, cfg: EmbeddingConfig) -> list[int]:
    """Bucket index multiset for a token; stable across runs and platforms."""
    if not token:
        raise ValueError("cannot hash an empty token")
    return [fnv1a64(g.encode("utf-8")) % cfg.buckets
            for g in char_ngrams(token, cfg.min_n, cfg.max_n)]


class NgramHasher:
    """Memoizing wrapper around :func:`hash_ngrams` for corpus-scale use."""

    def __init__(self, cfg: EmbeddingConfig):
        self.cfg = cfg
        self._memo: dict[str, np.ndarray] = {}

    def buckets(self, token: str) -> np.ndarray:
        got = self._memo.get(token)
        if got is None:
            got = np.asarray(hash_ngrams(token, self.cfg), dtype=np.int64)
            self._memo[token] = got
        return got
