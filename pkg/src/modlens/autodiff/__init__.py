"""Dense-tensor compute with reverse-mode differentiation and Adam."""

from .adam import AdamState, adam_step, clip_global_norm
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .graph import ComputeGraph, backward_grads, finite_diff_check, forward_eval, UnboundInputError
from .tensor import (
    AutodiffError,
    NonFiniteError,
    ShapeError,
    Tensor,
    add,
    bernoulli_log_prob,
    concat,
    constant,
    embed_mean,
    matmul,
    mul,
    parameter,
    scale,
    sigmoid,
    slice_cols,
    slice_rows,
    softmax,
    sq_l2,
    sub,
    tanh,
    tmean,
    tsum,
    zero_grads,
)

__all__ = [
    "AdamState", "adam_step", "clip_global_norm",
    "CheckpointError", "load_checkpoint", "save_checkpoint",
    "ComputeGraph", "backward_grads", "finite_diff_check", "forward_eval",
    "UnboundInputError",
    "AutodiffError", "NonFiniteError", "ShapeError", "Tensor",
    "add", "bernoulli_log_prob", "concat", "constant", "embed_mean",
    "matmul", "mul", "parameter", "scale", "sigmoid", "slice_cols",
    "slice_rows", "softmax", "sq_l2", "sub", "tanh", "tmean", "tsum",
    "zero_grads",
]
