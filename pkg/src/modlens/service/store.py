"""Durable moderation store: append-only event journal plus snapshots.

Every state change is one JSON line in ``log.jsonl``. Decisions are
fsynced before they are acknowledged, so an acked decision survives a
crash. A snapshot file bounds replay cost; the journal itself is never
truncated and doubles as the audit trail.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

VALID_ACTIONS = ("approve", "block")
VALID_REASONS = ("insults", "racism", "profanity", "spam")
VALID_STATUSES = ("pending", "approved", "blocked")


class ServiceError(Exception):
    """Base for store/API contract violations."""


class InvalidComment(ServiceError):
    """Ingest payload violates the comment contract."""


class DuplicateComment(ServiceError):
    """Comment id already ingested."""


class UnknownComment(ServiceError):
    """No entry with the requested id."""


class InvalidDecision(ServiceError):
    """Decision payload violates the action/reason contract."""


class DecisionConflict(ServiceError):
    """Entry already decided with a different action."""


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class HighlightSpan:
    """One highlighted run: inclusive token indices, [start, end) chars."""

    token_start: int
    token_end: int
    char_start: int
    char_end: int

    def __post_init__(self) -> None:
        if self.token_start < 0 or self.token_end < self.token_start:
            raise InvalidComment("token span must satisfy 0 <= start <= end")
        if self.char_start < 0 or self.char_end <= self.char_start:
            raise InvalidComment("char span must satisfy 0 <= start < end")

    def to_record(self) -> dict:
        return {
            "token_start": self.token_start,
            "token_end": self.token_end,
            "char_start": self.char_start,
            "char_end": self.char_end,
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "HighlightSpan":
        return cls(
            token_start=int(rec["token_start"]),
            token_end=int(rec["token_end"]),
            char_start=int(rec["char_start"]),
            char_end=int(rec["char_end"]),
        )


def validate_spans(spans: Iterable[HighlightSpan], text: str) -> tuple[HighlightSpan, ...]:
    """Spans must be in ascending order, non-overlapping, inside the text."""
    ordered = tuple(spans)
    prev_char = prev_tok = -1
    for span in ordered:
        if span.char_end > len(text):
            raise InvalidComment("highlight span exceeds text bounds")
        if span.char_start <= prev_char or span.token_start <= prev_tok:
            raise InvalidComment("highlight spans must be ascending and disjoint")
        prev_char = span.char_end - 1
        prev_tok = span.token_end
    return ordered


@dataclass(frozen=True)
class QueueEntry:
    """One moderation queue item; status moves pending -> approved|blocked."""

    id: str
    text: str
    probability: float
    spans: tuple[HighlightSpan, ...]
    ingested_at: str
    seq: int
    status: str = "pending"
    reason: str | None = None
    decided_by: str | None = None
    decided_at: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.status not in VALID_STATUSES:
            raise InvalidComment(f"unknown status {self.status!r}")
        if not (0.0 <= self.probability <= 1.0):
            raise InvalidComment("probability must lie in [0, 1]")
        if self.status == "blocked" and self.reason not in VALID_REASONS:
            raise InvalidComment("blocked entries must carry a valid reason")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "probability": self.probability,
            "spans": [s.to_record() for s in self.spans],
            "status": self.status,
            "reason": self.reason,
            "decided_by": self.decided_by,
            "decided_at": self.decided_at,
            "ingested_at": self.ingested_at,
            "seq": self.seq,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "QueueEntry":
        return cls(
            id=str(rec["id"]),
            text=str(rec["text"]),
            probability=float(rec["probability"]),
            spans=tuple(HighlightSpan.from_record(s) for s in rec["spans"]),
            status=str(rec["status"]),
            reason=rec.get("reason"),
            decided_by=rec.get("decided_by"),
            decided_at=rec.get("decided_at"),
            ingested_at=str(rec["ingested_at"]),
            seq=int(rec["seq"]),
            metadata=dict(rec.get("metadata") or {}),
        )


class ModerationStore:
    """Event-sourced queue state over a single append-only journal.

    Writes are serialized by one lock; the journal file handle stays open
    in append mode for the store's lifetime. Reopening a data directory
    replays the snapshot (if any) plus the journal suffix.
    """

    def __init__(self, data_dir: str | Path, *, snapshot_every: int = 256) -> None:
        if snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.snapshot_every = snapshot_every
        self._entries: dict[str, QueueEntry] = {}
        self._seq = 0
        self._since_snapshot = 0
        self._lock = threading.RLock()
        self._replay()
        self._log = open(self.log_path, "a", encoding="utf-8")

    # -- paths ---------------------------------------------------------

    @property
    def log_path(self) -> Path:
        return self.data_dir / "log.jsonl"

    @property
    def snapshot_path(self) -> Path:
        return self.data_dir / "snapshot.json"

    # -- recovery ------------------------------------------------------

    def _replay(self) -> None:
        snap_seq = 0
        if self.snapshot_path.exists():
            snap = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
            snap_seq = int(snap["seq"])
            for rec in snap["entries"]:
                entry = QueueEntry.from_record(rec)
                self._entries[entry.id] = entry
        self._seq = snap_seq
        if self.log_path.exists():
            with open(self.log_path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
            for i, line in enumerate(lines):
                stripped = line.strip()
                if not stripped:
                    continue
                try:
                    event = json.loads(stripped)
                except json.JSONDecodeError:
                    # A torn final line is a crash artifact of an event that
                    # was never acked (acks happen after fsync); drop it.
                    # Corruption anywhere else is a real integrity failure.
                    if i == len(lines) - 1:
                        break
                    raise
                if int(event["seq"]) <= snap_seq:
                    continue
                self._apply(event)
        self._since_snapshot = 0

    def _apply(self, event: Mapping) -> None:
        kind = event["event"]
        self._seq = int(event["seq"])
        if kind == "ingest":
            entry = QueueEntry.from_record(event["entry"])
            self._entries[entry.id] = entry
        elif kind == "decision":
            prior = self._entries[str(event["id"])]
            action = str(event["action"])
            self._entries[prior.id] = replace(
                prior,
                status="approved" if action == "approve" else "blocked",
                reason=event.get("reason"),
                decided_by=event.get("decided_by"),
                decided_at=event.get("decided_at"),
            )
        else:
            raise ValueError(f"unknown journal event {kind!r}")

    # -- journal -------------------------------------------------------

    def _append(self, event: dict, *, durable: bool) -> None:
        self._log.write(json.dumps(event, sort_keys=True) + "\n")
        self._log.flush()
        if durable:
            os.fsync(self._log.fileno())

    def _commit(self, event: dict) -> None:
        """Single mutation path: durable append, then apply, then maybe snapshot.

        The append is fsynced before the in-memory apply and the ack, so an
        acked event is always recoverable. The snapshot check runs after the
        apply so a snapshot always includes the event that triggered it.
        """
        self._append(event, durable=True)
        self._apply(event)
        self._since_snapshot += 1
        if self._since_snapshot >= self.snapshot_every:
            self.write_snapshot()

    def write_snapshot(self) -> None:
        """Atomic snapshot of current state; replay resumes after its seq."""
        with self._lock:
            payload = {
                "seq": self._seq,
                "entries": [e.to_record() for e in self._entries.values()],
            }
            tmp = self.snapshot_path.with_suffix(".json.tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, sort_keys=True)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.snapshot_path)
            self._since_snapshot = 0

    def close(self) -> None:
        with self._lock:
            if not self._log.closed:
                self._log.close()

    # -- operations ----------------------------------------------------

    def ingest(
        self,
        id: str,
        text: str,
        probability: float,
        spans: Iterable[HighlightSpan] = (),
        metadata: Mapping | None = None,
    ) -> QueueEntry:
        if not id or not id.strip():
            raise InvalidComment("comment id must be non-empty")
        if not text:
            raise InvalidComment("comment text must be non-empty")
        ordered = validate_spans(spans, text)
        with self._lock:
            if id in self._entries:
                raise DuplicateComment(f"comment {id!r} already ingested")
            entry = QueueEntry(
                id=id,
                text=text,
                probability=float(probability),
                spans=ordered,
                ingested_at=_utcnow(),
                seq=self._seq + 1,
                metadata=dict(metadata or {}),
            )
            event = {"event": "ingest", "seq": entry.seq, "entry": entry.to_record()}
            self._commit(event)
            return self._entries[id]

    def decide(
        self,
        id: str,
        action: str,
        reason: str | None = None,
        decided_by: str | None = None,
    ) -> QueueEntry:
        if action not in VALID_ACTIONS:
            raise InvalidDecision(f"action must be one of {VALID_ACTIONS}")
        if action == "block" and reason not in VALID_REASONS:
            raise InvalidDecision(f"block requires a reason from {VALID_REASONS}")
        if action == "approve" and reason is not None:
            raise InvalidDecision("approve must not carry a reason")
        with self._lock:
            entry = self._entries.get(id)
            if entry is None:
                raise UnknownComment(f"no comment {id!r}")
            if entry.status != "pending":
                wanted = "approved" if action == "approve" else "blocked"
                if entry.status == wanted:
                    return entry  # retry of the recorded decision
                raise DecisionConflict(
                    f"comment {id!r} already {entry.status}, cannot {action}")
            event = {
                "event": "decision",
                "seq": self._seq + 1,
                "id": id,
                "action": action,
                "reason": reason,
                "decided_by": decided_by,
                "decided_at": _utcnow(),
            }
            self._commit(event)
            return self._entries[id]

    # -- reads ---------------------------------------------------------

    def get(self, id: str) -> QueueEntry:
        with self._lock:
            entry = self._entries.get(id)
        if entry is None:
            raise UnknownComment(f"no comment {id!r}")
        return entry

    def queue(
        self,
        limit: int | None = None,
        min_probability: float | None = None,
        status: str | None = None,
    ) -> list[QueueEntry]:
        """Descending by probability; equal probabilities keep ingest order."""
        if status is not None and status not in VALID_STATUSES:
            raise InvalidDecision(f"status filter must be one of {VALID_STATUSES}")
        if limit is not None and limit < 1:
            raise InvalidDecision("limit must be >= 1")
        with self._lock:
            rows = list(self._entries.values())
        if status is not None:
            rows = [e for e in rows if e.status == status]
        if min_probability is not None:
            rows = [e for e in rows if e.probability >= min_probability]
        rows.sort(key=lambda e: (-e.probability, e.seq))
        return rows if limit is None else rows[:limit]

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)
