"""Selection generator: a recurrent Z-layer over encoder states.

The generator encodes a comment and emits, per token, the probability of
selecting that token into the rationale. During training selections are
sampled; at serving time they are thresholded at 0.5 so the same comment
always highlights identically. In the conditioned form (default) each
step's probability can depend on the previous selection through the
recurrence; independent mode drops that feedback so the per-token
Bernoullis factorize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, add, constant, matmul, parameter, sigmoid, slice_rows, tanh
from ..models.cells import EncoderConfig, glorot
from ..models.encoder import encode


def spans_from_z(z) -> tuple[tuple[int, int], ...]:
    """Maximal runs of selected indices as inclusive (start, end) pairs."""
    spans: list[tuple[int, int]] = []
    start: int | None = None
    for i, flag in enumerate(z):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            spans.append((start, i - 1))
            start = None
    if start is not None:
        spans.append((start, len(z) - 1))
    return tuple(spans)


@dataclass(frozen=True)
class Rationale:
    """Binary per-token selections with their sampling log-probability."""

    z: tuple[int, ...]
    log_prob: float
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.log_prob > 1e-12:
            raise ValueError(f"log_prob must be <= 0, got {self.log_prob}")
        if self.spans != spans_from_z(self.z):
            raise ValueError("spans do not match the maximal runs of z")

    @classmethod
    def from_z(cls, z, log_prob: float) -> "Rationale":
        flags = tuple(int(v) for v in z)
        return cls(z=flags, log_prob=float(log_prob), spans=spans_from_z(flags))

    @property
    def selected_count(self) -> int:
        return sum(self.z)

    @property
    def selected_fraction(self) -> float:
        return self.selected_count / len(self.z)

    def segment_lengths(self) -> tuple[int, ...]:
        return tuple(e - s + 1 for s, e in self.spans)


def init_zlayer(rng: np.random.Generator, in_dim: int, hidden: int,
                prefix: str = "z.") -> dict[str, Tensor]:
    return {
        f"{prefix}Wh": parameter(glorot(rng, in_dim, hidden)),
        f"{prefix}Wz": parameter(glorot(rng, 1, hidden)),
        f"{prefix}U": parameter(glorot(rng, hidden, hidden)),
        f"{prefix}b": parameter(np.zeros((1, hidden))),
        f"{prefix}wp": parameter(glorot(rng, hidden, 1)),
        f"{prefix}bp": parameter(np.zeros((1, 1))),
    }


def zlayer_step(s_prev: Tensor, h_t: Tensor, z_prev: np.ndarray | None,
                params: dict[str, Tensor], prefix: str = "z.") -> tuple[Tensor, Tensor]:
    """One recurrence step; returns (new state, selection logit).

    ``z_prev`` is the previous binary selection per row (a constant with
    no gradient path: sampling is handled by the score function, not by
    differentiating through the draw). Pass None to drop the feedback.
    """
    pre = add(matmul(h_t, params[f"{prefix}Wh"]), matmul(s_prev, params[f"{prefix}U"]))
    if z_prev is not None:
        pre = add(pre, matmul(constant(np.asarray(z_prev, dtype=np.float64)),
                              params[f"{prefix}Wz"]))
    s = tanh(add(pre, params[f"{prefix}b"]))
    logit = add(matmul(s, params[f"{prefix}wp"]), params[f"{prefix}bp"])
    return s, logit


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def run_zlayer(outs: list[Tensor], params: dict[str, Tensor], *, conditioned: bool,
               mode: str, lengths: np.ndarray | None = None,
               rng: np.random.Generator | None = None,
               given: np.ndarray | None = None,
               prefix: str = "z.") -> tuple[np.ndarray, list[Tensor], np.ndarray]:
    """Walk the Z-layer over per-position encoder states.

    ``outs[t]`` is the (B, H) encoder output at position t. Modes:
    'sample' draws z_t ~ Bernoulli(p_t) with ``rng``; 'greedy' takes
    z_t = 1 iff p_t >= 0.5; 'given' feeds a provided z matrix. Rows past
    their length (per ``lengths``) are forced to z = 0.

    Returns (z as a (B, T) 0/1 array, per-step logit tensors, per-step
    probabilities as a (B, T) array).
    """
    batch = outs[0].data.shape[0]
    steps = len(outs)
    hidden = params[f"{prefix}U"].data.shape[0]
    s = constant(np.zeros((batch, hidden)))
    z_prev = np.zeros((batch, 1))
    z = np.zeros((batch, steps))
    probs = np.zeros((batch, steps))
    logits: list[Tensor] = []
    if mode == "sample" and rng is None:
        raise ValueError("mode 'sample' requires an rng")
    if mode == "given" and given is None:
        raise ValueError("mode 'given' requires a z matrix")
    for t in range(steps):
        s, logit = zlayer_step(s, outs[t], z_prev if conditioned else None, params, prefix)
        p = _sigmoid_np(logit.data)
        if mode == "sample":
            col = (rng.random((batch, 1)) < p).astype(np.float64)
        elif mode == "greedy":
            col = (p >= 0.5).astype(np.float64)
        elif mode == "given":
            col = np.asarray(given[:, t:t + 1], dtype=np.float64)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if lengths is not None:
            col = col * (lengths > t).astype(np.float64).reshape(-1, 1)
        z[:, t] = col[:, 0]
        probs[:, t] = p[:, 0]
        logits.append(logit)
        z_prev = col
    return z, logits, probs


def _log_prob_value(logits_data: np.ndarray, z: np.ndarray) -> float:
    """Sum of log p(z_t) from raw logits, softplus-stable."""
    x = np.asarray(logits_data, dtype=np.float64)
    softplus = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    softplus_neg = np.maximum(-x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return float(np.sum(np.where(z > 0.5, -softplus_neg, -softplus)))


def generator_select_probs(x: Tensor, params: dict[str, Tensor], gen_cfg: EncoderConfig,
                           *, conditioned: bool = True) -> tuple[np.ndarray, Tensor]:
    """Per-token selection probabilities under deterministic feedback.

    Conditioned feedback feeds the thresholded decision (p >= 0.5), the
    same rule used at serving time. Returns (probabilities, encoder
    states) for the single comment x (K x d).
    """
    h = encode(x, params, gen_cfg, "gen.")
    rows = [slice_rows(h, t, t + 1) for t in range(h.data.shape[0])]
    _, logits, probs = run_zlayer(rows, params, conditioned=conditioned, mode="greedy")
    return probs[0], h


def sample_rationale(x: Tensor, params: dict[str, Tensor], gen_cfg: EncoderConfig,
                     rng: np.random.Generator, *, conditioned: bool = True) -> Rationale:
    """Draw z_t ~ Bernoulli(p_t) sequentially for one comment."""
    h = encode(x, params, gen_cfg, "gen.")
    rows = [slice_rows(h, t, t + 1) for t in range(h.data.shape[0])]
    z, logits, _ = run_zlayer(rows, params, conditioned=conditioned, mode="sample", rng=rng)
    logit_row = np.array([lg.data[0, 0] for lg in logits])
    return Rationale.from_z(z[0], _log_prob_value(logit_row, z[0]))
