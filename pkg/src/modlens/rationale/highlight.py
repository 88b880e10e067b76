"""Deterministic serving-time highlighting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..models.classifier import ClassifierModel
from ..text import embed_tokens
from .generator import Rationale, run_zlayer, _log_prob_value
from .joint import JointModel


@dataclass(frozen=True)
class Highlight:
    """What a moderator sees for one comment."""

    probability: float
    rationale: Rationale


def greedy_rationale(joint: JointModel, tokens) -> Rationale:
    """Thresholded selection (z_t = 1 iff p_t >= 0.5), fully reproducible."""
    if not tokens:
        raise ValueError("cannot highlight an empty comment")
    from ..models.encoder import encode
    from ..autodiff import slice_rows
    cfg = joint.config
    x = embed_tokens(tokens, joint.params["emb.table"], joint.hasher)
    h = encode(x, joint.params, cfg.gen_encoder, "gen.")
    rows = [slice_rows(h, t, t + 1) for t in range(h.data.shape[0])]
    z, logits, _ = run_zlayer(rows, joint.params, conditioned=cfg.conditioned,
                              mode="greedy")
    logit_row = np.array([lg.data[0, 0] for lg in logits])
    return Rationale.from_z(z[0], _log_prob_value(logit_row, z[0]))


def highlight_comment(classifier: ClassifierModel, joint: JointModel,
                      tokens) -> Highlight:
    """Inappropriateness probability plus the highlighted token spans."""
    if not tokens:
        raise ValueError("cannot highlight an empty comment")
    probability = classifier.comment_output(tuple(tokens)).probability
    return Highlight(probability=probability,
                     rationale=greedy_rationale(joint, tokens))
