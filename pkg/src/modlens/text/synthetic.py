"""Synthetic moderation corpus with gold rationale spans.

Stands in for a production comment dump: a comment is inappropriate if
and only if it contains at least one planted toxic token, and the gold
spans record exactly where those tokens sit. Toxic tokens can be
obfuscated with a single digit substitution ("1nsult" style) to exercise
subword robustness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Comment, CorpusError, INAPPROPRIATE, APPROPRIATE, RESERVED_REASONS

_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"

# Homoglyph-flavoured digit substitutions, applied where possible.
LEET_MAP = {"o": "0", "i": "1", "l": "1", "e": "3", "a": "4",
            "s": "5", "t": "7", "b": "8", "g": "9"}


@dataclass(frozen=True)
class SyntheticSpec:
    """Size and shape of a generated corpus."""

    comments: int = 2000
    benign_vocab: int = 200
    toxic_count: int = 10
    toxic_tokens: tuple[str, ...] = ()
    inappropriate_fraction: float = 0.5
    obfuscation_rate: float = 0.0
    min_tokens: int = 6
    max_tokens: int = 18
    # Fraction of plants that are a two-token toxic phrase instead of a
    # lone token; gives the gold rationales multi-word segments.
    phrase_fraction: float = 0.3

    def __post_init__(self):
        if not (0.0 <= self.inappropriate_fraction <= 1.0):
            raise ValueError("inappropriate_fraction must be in [0, 1]")
        if not (0.0 <= self.obfuscation_rate <= 1.0):
            raise ValueError("obfuscation_rate must be in [0, 1]")
        if self.min_tokens < 3 or self.max_tokens < self.min_tokens:
            raise ValueError("need 3 <= min_tokens <= max_tokens")


def _random_word(rng: np.random.Generator, min_len: int = 4, max_len: int = 8) -> str:
    length = int(rng.integers(min_len, max_len + 1))
    chars = []
    for i in range(length):
        pool = _CONSONANTS if i % 2 == 0 else _VOWELS
        chars.append(pool[int(rng.integers(0, len(pool)))])
    return "".join(chars)


def _make_vocab(rng: np.random.Generator, size: int, avoid: set[str],
                min_len: int = 4, max_len: int = 8) -> list[str]:
    vocab: list[str] = []
    seen = set(avoid)
    while len(vocab) < size:
        word = _random_word(rng, min_len, max_len)
        if word not in seen:
            seen.add(word)
            vocab.append(word)
    return vocab


def obfuscate_token(token: str, rng: np.random.Generator) -> str:
    """Replace exactly one character with a digit."""
    positions = [i for i, ch in enumerate(token) if ch in LEET_MAP]
    if positions:
        i = positions[int(rng.integers(0, len(positions)))]
        sub = LEET_MAP[token[i]]
    else:
        letters = [i for i, ch in enumerate(token) if not ch.isdigit()]
        if not letters:
            return token
        i = letters[int(rng.integers(0, len(letters)))]
        sub = str(int(rng.integers(0, 10)))
    return token[:i] + sub + token[i + 1:]


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int) -> list[Comment]:
    """Deterministic corpus with labels implied by toxic-token presence."""
    rng = np.random.default_rng(seed)
    if spec.toxic_tokens:
        toxic = list(spec.toxic_tokens)
    else:
        # Toxic markers are long (8-12 chars) so a one-digit substitution
        # still leaves most of their character n-grams recognizable.
        toxic = _make_vocab(rng, spec.toxic_count, avoid=set(),
                            min_len=8, max_len=12)
    if not toxic and spec.inappropriate_fraction > 0:
        raise CorpusError("cannot request inappropriate comments with an empty toxic set")
    benign = _make_vocab(rng, spec.benign_vocab, avoid=set(toxic))
    overlap = set(toxic) & set(benign)
    if overlap:
        raise CorpusError(f"toxic tokens overlap benign vocabulary: {sorted(overlap)}")

    n_bad = int(round(spec.comments * spec.inappropriate_fraction))
    bad_ids = set(rng.choice(spec.comments, size=n_bad, replace=False).tolist())

    comments: list[Comment] = []
    for idx in range(spec.comments):
        length = int(rng.integers(spec.min_tokens, spec.max_tokens + 1))
        tokens = [benign[int(i)] for i in rng.integers(0, len(benign), size=length)]
        gold: list[int] = []
        label = APPROPRIATE
        reasons: tuple[str, ...] = ()
        if idx in bad_ids:
            label = INAPPROPRIATE
            reasons = (RESERVED_REASONS[int(rng.integers(0, len(RESERVED_REASONS)))],)
            pair = bool(rng.random() < spec.phrase_fraction) and length >= 4
            width = 2 if pair else 1
            start = int(rng.integers(0, length - width + 1))
            for k in range(width):
                word = toxic[int(rng.integers(0, len(toxic)))]
                if rng.random() < spec.obfuscation_rate:
                    word = obfuscate_token(word, rng)
                tokens[start + k] = word
                gold.append(start + k)
        comments.append(Comment(
            id=f"s{idx:06d}",
            tokens=tuple(tokens),
            label=label,
            reasons=reasons,
            gold_spans=tuple(gold) if label == INAPPROPRIATE else (),
            timestamp=float(idx),
            text=" ".join(tokens),
        ))
    return comments


def obfuscate_corpus(comments: list[Comment], rate: float, seed: int) -> list[Comment]:
    """Copy of a corpus with gold-span tokens digit-obfuscated at `rate`.

    Used to build obfuscated *test* variants of a clean corpus; only the
    tokens recorded in gold spans (the toxic ones) are touched.
    """
    rng = np.random.default_rng(seed)
    out: list[Comment] = []
    for comment in comments:
        if not comment.gold_spans:
            out.append(comment)
            continue
        tokens = list(comment.tokens)
        changed = False
        for idx in comment.gold_spans:
            if rng.random() < rate:
                tokens[idx] = obfuscate_token(tokens[idx], rng)
                changed = True
        if not changed:
            out.append(comment)
            continue
        out.append(Comment(
            id=comment.id,
            tokens=tuple(tokens),
            label=comment.label,
            reasons=comment.reasons,
            gold_spans=comment.gold_spans,
            timestamp=comment.timestamp,
            text=" ".join(tokens),
        ))
    return out
