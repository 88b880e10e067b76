"""Comment records, line-delimited corpus files, and the split protocol.

Corpus files are UTF-8 JSON lines, one record per comment:

    {"id": str, "text": str, "label": "appropriate" | "inappropriate",
     "reasons": [str], "gold_spans": [int] (optional), "timestamp": float}

Validation/test splits are class-balanced and drawn from the most recent
comments; everything older goes to training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .tokenize import tokenize

APPROPRIATE = "appropriate"
INAPPROPRIATE = "inappropriate"
LABELS = (APPROPRIATE, INAPPROPRIATE)

# Reserved violation reasons a moderator can attach to a block decision.
RESERVED_REASONS = ("insults", "racism", "profanity", "spam")

# Longer comments are clipped to this many tokens, never rejected.
MAX_TOKENS = 256


class CorpusError(Exception):
    pass


class CorpusFormatError(CorpusError):
    """Malformed corpus line; carries the 1-based line number."""

    def __init__(self, path, line_no: int, why: str):
        super().__init__(f"{path}:{line_no}: {why}")
        self.line_no = line_no


@dataclass(frozen=True)
class Comment:
    id: str
    tokens: tuple[str, ...]
    label: str
    reasons: tuple[str, ...] = ()
    gold_spans: tuple[int, ...] | None = None
    timestamp: float = 0.0
    text: str | None = None

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"comment {self.id!r} has no tokens")
        if self.label not in LABELS:
            raise ValueError(f"comment {self.id!r}: unknown label {self.label!r}")
        if self.reasons and self.label != INAPPROPRIATE:
            raise ValueError(f"comment {self.id!r}: reasons on an appropriate comment")
        for reason in self.reasons:
            if reason not in RESERVED_REASONS:
                raise ValueError(f"comment {self.id!r}: unknown reason {reason!r}")
        if self.gold_spans is not None:
            for idx in self.gold_spans:
                if not (0 <= idx < len(self.tokens)):
                    raise ValueError(f"comment {self.id!r}: gold span {idx} out of range")

    @property
    def is_inappropriate(self) -> bool:
        return self.label == INAPPROPRIATE

    @property
    def label_index(self) -> int:
        return 1 if self.is_inappropriate else 0


def make_comment(id: str, text: str, label: str, reasons=(), gold_spans=None,
                 timestamp: float = 0.0) -> Comment:
    """Tokenize and clip a raw text record into a Comment."""
    tokens = tokenize(text)
    if len(tokens) > MAX_TOKENS:
        tokens = tokens[:MAX_TOKENS]
        if gold_spans is not None:
            gold_spans = [i for i in gold_spans if i < MAX_TOKENS]
    return Comment(
        id=id,
        tokens=tuple(tokens),
        label=label,
        reasons=tuple(reasons),
        gold_spans=None if gold_spans is None else tuple(sorted(gold_spans)),
        timestamp=float(timestamp),
        text=text,
    )


@dataclass
class CorpusSplit:
    train: list[Comment]
    validation: list[Comment]
    test: list[Comment]
    balance: dict = field(default_factory=dict)


def _record(comment: Comment) -> dict:
    rec = {
        "id": comment.id,
        "text": comment.text if comment.text is not None else " ".join(comment.tokens),
        "label": comment.label,
        "reasons": list(comment.reasons),
        "timestamp": comment.timestamp,
    }
    if comment.gold_spans is not None:
        rec["gold_spans"] = list(comment.gold_spans)
    return rec


def save_corpus(path: str | Path, comments: list[Comment]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for comment in comments:
            fh.write(json.dumps(_record(comment), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def load_corpus(path: str | Path) -> list[Comment]:
    comments: list[Comment] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(path, line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict):
                raise CorpusFormatError(path, line_no, "record is not an object")
            for key in ("id", "text", "label"):
                if key not in rec:
                    raise CorpusFormatError(path, line_no, f"missing field {key!r}")
            if rec["id"] in seen:
                raise CorpusFormatError(path, line_no, f"duplicate id {rec['id']!r}")
            seen.add(rec["id"])
            try:
                comments.append(make_comment(
                    id=rec["id"],
                    text=rec["text"],
                    label=rec["label"],
                    reasons=rec.get("reasons", ()),
                    gold_spans=rec.get("gold_spans"),
                    timestamp=rec.get("timestamp", 0.0),
                ))
            except ValueError as exc:
                raise CorpusFormatError(path, line_no, str(exc)) from exc
    return comments


def split_corpus(corpus: list[Comment], val_size: int, test_size: int,
                 seed: int) -> CorpusSplit:
    """Recent, class-balanced validation/test splits; the rest trains.

    Walks the corpus from most recent backwards, collecting candidates of
    each class until both the validation and test quotas can be filled,
    then assigns them at random (seeded). Splits are disjoint by id and
    deterministic for a fixed seed.
    """
    if val_size % 2 or test_size % 2:
        raise CorpusError("val_size and test_size must be even (class-balanced splits)")
    per_class = (val_size + test_size) // 2
    by_recency = sorted(corpus, key=lambda c: (c.timestamp, c.id), reverse=True)
    pools: dict[str, list[Comment]] = {APPROPRIATE: [], INAPPROPRIATE: []}
    taken: set[str] = set()
    for comment in by_recency:
        pool = pools[comment.label]
        if len(pool) < per_class:
            pool.append(comment)
            taken.add(comment.id)
        if all(len(p) >= per_class for p in pools.values()):
            break
    for label, pool in pools.items():
        if len(pool) < per_class:
            raise CorpusError(
                f"not enough {label!r} comments: need {per_class}, have {len(pool)}")

    rng = np.random.default_rng(seed)
    val: list[Comment] = []
    test: list[Comment] = []
    for label in LABELS:
        pool = pools[label]
        order = rng.permutation(len(pool))
        val.extend(pool[i] for i in order[: val_size // 2])
        test.extend(pool[i] for i in order[val_size // 2: per_class])
    train = [c for c in corpus if c.id not in taken]
    if not train:
        raise CorpusError("no comments left for training after splitting")

    def counts(split):
        bad = sum(c.is_inappropriate for c in split)
        return {"appropriate": len(split) - bad, "inappropriate": bad}

    return CorpusSplit(
        train=train, validation=val, test=test,
        balance={"train": counts(train), "validation": counts(val), "test": counts(test)},
    )
