"""Recurrent cells: the gated RCNN cell and a standard LSTM.

The RCNN cell keeps `order` stacked accumulator vectors c^(1..n). One
step with input x_t and previous accumulators c^(l):

    gate    = sigmoid(x_t W_g + c^(n) U_g + b_g)
    c^(1)  <- gate * c^(1) + (1 - gate) * (x_t W_1)
    c^(l)  <- gate * c^(l) + (1 - gate) * (c^(l-1) + x_t W_l)   l = 2..n
    h_t     = tanh(c^(n) + b)

where every right-hand side reads the *previous* step's accumulators.
This definition is normative for the package; parameter counts below
follow it term by term.

All step functions operate on (B, d) row batches; rows never mix, so a
single-sequence call is just B = 1. An optional (B, 1) mask freezes the
state of finished rows in padded batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, add, concat, constant, mul, parameter, sigmoid, sub, tanh


@dataclass(frozen=True)
class EncoderConfig:
    cell: str = "rcnn"            # "rcnn" or "lstm"
    hidden: int = 32
    layers: int = 2
    order: int = 2                # rcnn accumulator count
    bidirectional: bool = True
    pooling: str = "final"        # "final" or "mean"

    def __post_init__(self):
        if self.cell not in ("rcnn", "lstm"):
            raise ValueError(f"unknown cell kind {self.cell!r}")
        if self.layers < 1 or self.hidden < 1 or self.order < 1:
            raise ValueError("layers, hidden and order must be >= 1")
        if self.pooling not in ("final", "mean"):
            raise ValueError(f"unknown pooling {self.pooling!r}")

    @property
    def out_dim(self) -> int:
        return self.hidden * (2 if self.bidirectional else 1)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_rcnn_cell(rng, d_in: int, d: int, order: int) -> dict[str, Tensor]:
    p = {
        "Wg": parameter(glorot(rng, d_in, d)),
        "Ug": parameter(glorot(rng, d, d)),
        "bg": parameter(np.zeros((1, d))),
        "b": parameter(np.zeros((1, d))),
    }
    for l in range(1, order + 1):
        p[f"W{l}"] = parameter(glorot(rng, d_in, d))
    return p


def init_lstm_cell(rng, d_in: int, d: int) -> dict[str, Tensor]:
    p: dict[str, Tensor] = {}
    for gate in ("i", "f", "o", "c"):
        p[f"W{gate}"] = parameter(glorot(rng, d_in, d))
        p[f"U{gate}"] = parameter(glorot(rng, d, d))
        p[f"b{gate}"] = parameter(np.zeros((1, d)))
    return p


def rcnn_zero_state(batch: int, d: int, order: int) -> list[Tensor]:
    return [constant(np.zeros((batch, d))) for _ in range(order)]


def lstm_zero_state(batch: int, d: int) -> tuple[Tensor, Tensor]:
    return constant(np.zeros((batch, d))), constant(np.zeros((batch, d)))


def _mask_mix(new: Tensor, old: Tensor, mask: Tensor | None) -> Tensor:
    if mask is None:
        return new
    one_minus = constant(1.0 - mask.data)
    return add(mul(mask, new), mul(one_minus, old))


def rcnn_step(state: list[Tensor], x_t: Tensor, p: dict[str, Tensor],
              mask: Tensor | None = None) -> tuple[list[Tensor], Tensor]:
    """One RCNN step; returns (new accumulators, h_t)."""
    order = len(state)
    gate = sigmoid(add(add(x_t @ p["Wg"], state[-1] @ p["Ug"]), p["bg"]))
    keep = sub(constant(np.ones_like(gate.data)), gate)
    new_state: list[Tensor] = []
    for l in range(order):
        inject = x_t @ p[f"W{l + 1}"]
        if l > 0:
            inject = add(state[l - 1], inject)
        cand = add(mul(gate, state[l]), mul(keep, inject))
        new_state.append(_mask_mix(cand, state[l], mask))
    h = tanh(add(new_state[-1], p["b"]))
    return new_state, h


def lstm_step(state: tuple[Tensor, Tensor], x_t: Tensor, p: dict[str, Tensor],
              mask: Tensor | None = None) -> tuple[tuple[Tensor, Tensor], Tensor]:
    """Standard LSTM step with sigmoid gates and tanh candidate."""
    h_prev, c_prev = state
    i = sigmoid(add(add(x_t @ p["Wi"], h_prev @ p["Ui"]), p["bi"]))
    f = sigmoid(add(add(x_t @ p["Wf"], h_prev @ p["Uf"]), p["bf"]))
    o = sigmoid(add(add(x_t @ p["Wo"], h_prev @ p["Uo"]), p["bo"]))
    c_tilde = tanh(add(add(x_t @ p["Wc"], h_prev @ p["Uc"]), p["bc"]))
    c_new = add(mul(f, c_prev), mul(i, c_tilde))
    h_new = mul(o, tanh(c_new))
    c = _mask_mix(c_new, c_prev, mask)
    h = _mask_mix(h_new, h_prev, mask)
    return (h, c), h


def cell_param_count(cell: str, d_in: int, d: int, order: int) -> int:
    if cell == "rcnn":
        # order input maps + gate (W, U, b) + output bias
        return order * d_in * d + (d_in * d + d * d + d) + d
    if cell == "lstm":
        return 4 * (d_in * d + d * d + d)
    raise ValueError(f"unknown cell kind {cell!r}")


def param_count(cfg: EncoderConfig, d_in: int) -> int:
    """Learnable parameters in the encoder stack (embeddings excluded)."""
    directions = 2 if cfg.bidirectional else 1
    total = 0
    layer_in = d_in
    for _ in range(cfg.layers):
        total += directions * cell_param_count(cfg.cell, layer_in, cfg.hidden, cfg.order)
        layer_in = cfg.out_dim
    return total
