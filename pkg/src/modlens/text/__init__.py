"""Tokenization, subword embeddings, corpus handling and batching."""

from .batches import balanced_batches
from .corpus import (
    APPROPRIATE,
    INAPPROPRIATE,
    LABELS,
    MAX_TOKENS,
    RESERVED_REASONS,
    Comment,
    CorpusError,
    CorpusFormatError,
    CorpusSplit,
    load_corpus,
    make_comment,
    save_corpus,
    split_corpus,
)
from .embed import drop_ngrams, embed_step, embed_tokens, init_embedding_table
from .ngrams import EmbeddingConfig, NgramHasher, char_ngrams, fnv1a64, hash_ngrams
from .synthetic import (
    SyntheticSpec,
    generate_synthetic_corpus,
    obfuscate_corpus,
    obfuscate_token,
)
from .tokenize import tokenize, tokenize_with_offsets

__all__ = [
    "APPROPRIATE", "INAPPROPRIATE", "LABELS", "MAX_TOKENS", "RESERVED_REASONS",
    "Comment", "CorpusError", "CorpusFormatError", "CorpusSplit",
    "load_corpus", "make_comment", "save_corpus", "split_corpus",
    "balanced_batches",
    "drop_ngrams", "embed_step", "embed_tokens", "init_embedding_table",
    "EmbeddingConfig", "NgramHasher", "char_ngrams", "fnv1a64", "hash_ngrams",
    "SyntheticSpec", "generate_synthetic_corpus", "obfuscate_corpus", "obfuscate_token",
    "tokenize", "tokenize_with_offsets",
]
