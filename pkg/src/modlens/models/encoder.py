"""Stacked (optionally bidirectional) recurrent encoders over batches."""

from __future__ import annotations

import numpy as np

from ..autodiff import Tensor, concat, constant, slice_rows
from .cells import (
    EncoderConfig,
    init_lstm_cell,
    init_rcnn_cell,
    lstm_step,
    lstm_zero_state,
    rcnn_step,
    rcnn_zero_state,
)


def init_encoder(rng: np.random.Generator, d_in: int, cfg: EncoderConfig,
                 prefix: str = "enc.") -> dict[str, Tensor]:
    """Named parameter tensors for the full stack."""
    params: dict[str, Tensor] = {}
    directions = ["f", "b"] if cfg.bidirectional else ["f"]
    layer_in = d_in
    for layer in range(cfg.layers):
        for direction in directions:
            key = f"{prefix}l{layer}.{direction}."
            if cfg.cell == "rcnn":
                cell = init_rcnn_cell(rng, layer_in, cfg.hidden, cfg.order)
            else:
                cell = init_lstm_cell(rng, layer_in, cfg.hidden)
            for name, tensor in cell.items():
                params[key + name] = tensor
        layer_in = cfg.out_dim
    return params


def scoped(params: dict[str, Tensor], prefix: str) -> dict[str, Tensor]:
    cut = len(prefix)
    return {k[cut:]: v for k, v in params.items() if k.startswith(prefix)}


def _run_direction(steps: list[Tensor], masks, cell_params, cfg: EncoderConfig,
                   reverse: bool) -> list[Tensor]:
    batch = steps[0].data.shape[0]
    if cfg.cell == "rcnn":
        state = rcnn_zero_state(batch, cfg.hidden, cfg.order)
        step_fn = rcnn_step
    else:
        state = lstm_zero_state(batch, cfg.hidden)
        step_fn = lstm_step
    order = range(len(steps) - 1, -1, -1) if reverse else range(len(steps))
    outputs: list[Tensor | None] = [None] * len(steps)
    for t in order:
        mask = masks[t] if masks is not None else None
        state, h = step_fn(state, steps[t], cell_params, mask)
        outputs[t] = h
    return outputs  # type: ignore[return-value]


def encode_batch(steps: list[Tensor], masks: list[Tensor] | None,
                 params: dict[str, Tensor], cfg: EncoderConfig,
                 prefix: str = "enc.") -> list[Tensor]:
    """Per-position hidden states for a padded batch.

    `steps[t]` is the (B, d_in) embedding of token t across the batch;
    `masks[t]` is a (B, 1) 0/1 tensor marking rows still inside their
    sequence. Layer l consumes layer l-1 outputs; bidirectional stacks
    concatenate the forward and reverse passes per position.
    """
    if not steps:
        raise ValueError("cannot encode an empty sequence")
    current = steps
    for layer in range(cfg.layers):
        fwd = _run_direction(current, masks, scoped(params, f"{prefix}l{layer}.f."), cfg,
                             reverse=False)
        if cfg.bidirectional:
            bwd = _run_direction(current, masks, scoped(params, f"{prefix}l{layer}.b."), cfg,
                                 reverse=True)
            current = [concat([f, b], axis=1) for f, b in zip(fwd, bwd)]
        else:
            current = fwd
    return current


def encode(x: Tensor, params: dict[str, Tensor], cfg: EncoderConfig,
           prefix: str = "enc.") -> Tensor:
    """K x H hidden states for a single comment's K x d_in embedding matrix."""
    K = x.data.shape[0]
    if K < 1:
        raise ValueError("cannot encode an empty sequence")
    steps = [slice_rows(x, t, t + 1) for t in range(K)]
    outputs = encode_batch(steps, None, params, cfg, prefix)
    return concat(outputs, axis=0)
