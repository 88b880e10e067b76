"""Rationale extraction: selection generator, policy-gradient training,
exact enumeration oracles, the saliency baseline, and serving-time
highlighting."""

from .exact import (
    EnumeratedObjective,
    all_patterns,
    enumerate_objective,
    exact_gradient,
    expected_loss,
    mc_gradient_chunks,
)
from .generator import (
    Rationale,
    generator_select_probs,
    init_zlayer,
    run_zlayer,
    sample_rationale,
    spans_from_z,
    zlayer_step,
)
from .highlight import Highlight, greedy_rationale, highlight_comment
from .joint import JointConfig, JointModel, joint_config_from_dict
from .loss import (
    RationaleLossTerms,
    clas_distribution,
    rationale_loss,
    selected_count,
    selected_embedding_rows,
    transition_count,
)
from .reinforce import (
    RolloutBatch,
    RunningBaseline,
    estimate_generator_gradient,
    policy_rollout,
)
from .saliency import saliency_scores, select_fraction, select_top_k
from .train import evaluate_joint, extend_seeds, train_joint

__all__ = [
    "EnumeratedObjective",
    "all_patterns",
    "enumerate_objective",
    "exact_gradient",
    "expected_loss",
    "mc_gradient_chunks",
    "Rationale",
    "generator_select_probs",
    "init_zlayer",
    "run_zlayer",
    "sample_rationale",
    "spans_from_z",
    "zlayer_step",
    "Highlight",
    "greedy_rationale",
    "highlight_comment",
    "JointConfig",
    "JointModel",
    "joint_config_from_dict",
    "RationaleLossTerms",
    "clas_distribution",
    "rationale_loss",
    "selected_count",
    "selected_embedding_rows",
    "transition_count",
    "RolloutBatch",
    "RunningBaseline",
    "estimate_generator_gradient",
    "policy_rollout",
    "saliency_scores",
    "select_fraction",
    "select_top_k",
    "evaluate_joint",
    "extend_seeds",
    "train_joint",
]
