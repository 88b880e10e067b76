"""Model adapter turning raw text into a score plus highlight spans."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from ..models import ClassifierModel
from ..rationale import JointModel, greedy_rationale
from ..text import tokenize_with_offsets
from .store import HighlightSpan, InvalidComment


@dataclass(frozen=True)
class ScoredComment:
    probability: float
    spans: tuple[HighlightSpan, ...]


class CommentScorer(Protocol):
    def score(self, text: str) -> ScoredComment: ...


class ModelScorer:
    """Scores with a trained classifier; highlights with a joint model.

    Without a joint model the scorer still serves probabilities, just
    with empty highlight spans.
    """

    def __init__(self, classifier: ClassifierModel, joint: JointModel | None = None) -> None:
        self.classifier = classifier
        self.joint = joint

    def score(self, text: str) -> ScoredComment:
        offsets = tokenize_with_offsets(text)
        if not offsets:
            raise InvalidComment("comment text has no tokens")
        tokens = tuple(tok for tok, _, _ in offsets)
        probability = float(self.classifier.comment_output(tokens).probability)
        spans: tuple[HighlightSpan, ...] = ()
        if self.joint is not None:
            rationale = greedy_rationale(self.joint, tokens)
            spans = tuple(
                HighlightSpan(
                    token_start=start,
                    token_end=end,
                    char_start=offsets[start][1],
                    char_end=offsets[end][2],
                )
                for start, end in rationale.spans
            )
        return ScoredComment(probability=probability, spans=spans)

    @classmethod
    def load(cls, classifier_path: str | Path, joint_path: str | Path | None = None) -> "ModelScorer":
        classifier = ClassifierModel.load(classifier_path)
        joint = JointModel.load(joint_path) if joint_path is not None else None
        return cls(classifier, joint)
