"""Recurrent encoders and the binary comment classifier."""

from .cells import (
    EncoderConfig,
    cell_param_count,
    init_lstm_cell,
    init_rcnn_cell,
    lstm_step,
    lstm_zero_state,
    param_count,
    rcnn_step,
    rcnn_zero_state,
)
from .classifier import (
    ClassifierModel,
    ClassifierOutput,
    classify_comment,
    classify_hidden,
    head_distribution,
    init_head,
    padded_steps,
    pool_states,
)
from .encoder import encode, encode_batch, init_encoder, scoped
from .training import (
    ClassifierTrainConfig,
    evaluate_split,
    one_hot_labels,
    train_classifier,
)

__all__ = [
    "EncoderConfig",
    "cell_param_count",
    "init_lstm_cell",
    "init_rcnn_cell",
    "lstm_step",
    "lstm_zero_state",
    "param_count",
    "rcnn_step",
    "rcnn_zero_state",
    "ClassifierModel",
    "ClassifierOutput",
    "classify_comment",
    "classify_hidden",
    "head_distribution",
    "init_head",
    "padded_steps",
    "pool_states",
    "encode",
    "encode_batch",
    "init_encoder",
    "scoped",
    "ClassifierTrainConfig",
    "evaluate_split",
    "one_hot_labels",
    "train_classifier",
]
