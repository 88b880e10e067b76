"""Moderation queue service: durable store, model scorer, HTTP app."""

from .app import DecisionRequest, IngestRequest, create_app
from .scoring import CommentScorer, ModelScorer, ScoredComment
from .store import (
    VALID_ACTIONS,
    VALID_REASONS,
    VALID_STATUSES,
    DecisionConflict,
    DuplicateComment,
    HighlightSpan,
    InvalidComment,
    InvalidDecision,
    ModerationStore,
    QueueEntry,
    ServiceError,
    UnknownComment,
    validate_spans,
)

__all__ = [
    "CommentScorer", "ModelScorer", "ScoredComment",
    "ModerationStore", "QueueEntry", "HighlightSpan",
    "ServiceError", "InvalidComment", "DuplicateComment", "UnknownComment",
    "InvalidDecision", "DecisionConflict",
    "VALID_ACTIONS", "VALID_REASONS", "VALID_STATUSES",
    "validate_spans", "create_app", "IngestRequest", "DecisionRequest",
]
