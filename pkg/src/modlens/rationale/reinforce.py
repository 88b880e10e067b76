"""Policy-gradient training step for the selection generator.

Sampling a discrete z is not differentiable, so the generator learns from
the score function: grad = mean over samples of (total loss - baseline) *
grad log p(z|x). The classifier learns from the plain mean of its squared
error over the same samples. Both gradients come out of one backward pass
over a single surrogate scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    bernoulli_log_prob,
    concat,
    constant,
    mul,
    scale,
    sq_l2,
    sub,
    tsum,
    zero_grads,
)
from ..models.classifier import head_distribution, padded_steps, pool_states
from ..models.encoder import encode_batch
from ..text import Comment, NgramHasher
from .generator import run_zlayer
from .joint import JointConfig, JointModel
from .loss import selected_count, transition_count


@dataclass
class RunningBaseline:
    """Exponential moving average of the batch-mean total loss.

    Reads return the value BEFORE the current batch is folded in, so the
    baseline never depends on the samples it is subtracted from.
    """

    decay: float = 0.99
    value: float = 0.0
    initialized: bool = False

    def read(self) -> float:
        return self.value if self.initialized else 0.0

    def update(self, mean_loss: float) -> None:
        if not self.initialized:
            self.value = float(mean_loss)
            self.initialized = True
        else:
            self.value = self.decay * self.value + (1.0 - self.decay) * float(mean_loss)


def padded_selected_steps(selected_seqs: list[tuple[str, ...]], table: Tensor,
                          hasher: NgramHasher):
    """Like padded_steps but an empty selection becomes one zero row."""
    filled = [seq if seq else (None,) for seq in selected_seqs]
    lengths = np.array([len(seq) for seq in filled], dtype=np.int64)
    k_max = int(lengths.max())
    from ..text import embed_step
    steps, masks = [], []
    for t in range(k_max):
        rows = [seq[t] if t < len(seq) else None for seq in filled]
        steps.append(embed_step(rows, table, hasher))
        masks.append(constant((lengths > t).astype(np.float64).reshape(-1, 1)))
    return steps, masks, lengths


@dataclass
class RolloutBatch:
    """Everything one batch of sampled rationales produced."""

    z: list[np.ndarray]                      # per sample: (B, T) 0/1
    logits: list[list[Tensor]]               # per sample: per step (B, 1)
    lengths: np.ndarray                      # (B,)
    y: np.ndarray                            # (B, 2) one-hot targets
    dist: Tensor | None                      # (S*B, 2), None when overridden
    class_terms: np.ndarray                  # (S, B)
    sparsity: np.ndarray                     # (S, B)
    coherence: np.ndarray                    # (S, B)
    totals: np.ndarray = field(init=False)

    def __post_init__(self):
        self.totals = self.class_terms + self.sparsity + self.coherence

    @property
    def selected_fraction(self) -> float:
        counts = np.stack([zs.sum(axis=1) for zs in self.z])
        return float(np.mean(counts / self.lengths))

    def stats(self) -> dict[str, float]:
        return {
            "total": float(self.totals.mean()),
            "classification": float(self.class_terms.mean()),
            "sparsity": float(self.sparsity.mean()),
            "coherence": float(self.coherence.mean()),
            "selected_fraction": self.selected_fraction,
        }


def policy_rollout(batch: list[Comment], model: JointModel, cfg: JointConfig,
                   rng: np.random.Generator, samples: int,
                   class_term_override=None) -> RolloutBatch:
    """Sample rationales for a batch and run the classifier on them.

    Each of the ``samples`` draws uses its own rng stream split from
    ``rng``, so draws could be taken in any order (or in parallel)
    without changing the result.
    """
    params = model.params
    tokens = [c.tokens for c in batch]
    n = len(batch)
    steps, masks, lengths = padded_steps(tokens, params["emb.table"], model.hasher)
    outs = encode_batch(steps, masks, params, cfg.gen_encoder, "gen.")
    streams = rng.spawn(samples)

    z_list: list[np.ndarray] = []
    logits_list: list[list[Tensor]] = []
    selected: list[tuple[str, ...]] = []
    for s in range(samples):
        z, logits, _ = run_zlayer(outs, params, conditioned=cfg.conditioned,
                                  mode="sample", lengths=lengths, rng=streams[s])
        z_list.append(z)
        logits_list.append(logits)
        for b, comment in enumerate(batch):
            selected.append(tuple(tok for t, tok in enumerate(comment.tokens)
                                  if z[b, t] > 0.5))

    y = np.zeros((n, 2))
    y[np.arange(n), [c.label_index for c in batch]] = 1.0

    if class_term_override is None:
        c_steps, c_masks, c_lengths = padded_selected_steps(selected, params["emb.table"],
                                                            model.hasher)
        c_outs = encode_batch(c_steps, c_masks, params, cfg.clas_encoder, "clas.")
        pooled = pool_states(c_outs, cfg.clas_encoder, c_masks, c_lengths)
        dist = head_distribution(pooled, params, "clas.head.")
        y_rep = np.tile(y, (samples, 1))
        class_terms = ((dist.data - y_rep) ** 2).sum(axis=1).reshape(samples, n)
    else:
        dist = None
        class_terms = np.array([[float(class_term_override(batch[b], z_list[s][b]))
                                 for b in range(n)] for s in range(samples)])

    sparsity = np.array([[cfg.lam1 * selected_count(z_list[s][b, :lengths[b]])
                          for b in range(n)] for s in range(samples)])
    coherence = np.array([[cfg.lam2 * transition_count(z_list[s][b, :lengths[b]])
                           for b in range(n)] for s in range(samples)])
    return RolloutBatch(z=z_list, logits=logits_list, lengths=lengths, y=y,
                        dist=dist, class_terms=class_terms, sparsity=sparsity,
                        coherence=coherence)


def estimate_generator_gradient(batch: list[Comment], model: JointModel,
                                cfg: JointConfig, rng: np.random.Generator,
                                baseline: RunningBaseline | None = None,
                                class_term_override=None
                                ) -> tuple[dict[str, np.ndarray], dict[str, float]]:
    """One REINFORCE step's gradients plus the batch loss statistics.

    The returned map covers every model parameter (zeros where a term
    does not reach). The baseline, when given, is read before being
    updated with this batch's mean loss.
    """
    rollout = policy_rollout(batch, model, cfg, rng, cfg.samples, class_term_override)
    n = len(batch)
    denom = float(cfg.samples * n)
    base = baseline.read() if baseline is not None else 0.0

    terms: list[Tensor] = []
    for s in range(cfg.samples):
        weights = ((rollout.totals[s] - base) / denom).reshape(-1, 1)
        w = constant(weights)
        for t, logit in enumerate(rollout.logits[s]):
            mask = (rollout.lengths > t).astype(np.float64).reshape(-1, 1)
            lp = bernoulli_log_prob(logit, rollout.z[s][:, t:t + 1], mask)
            terms.append(mul(lp, w))
    surrogate = tsum(concat(terms, axis=1))
    if rollout.dist is not None:
        y_rep = np.tile(rollout.y, (cfg.samples, 1))
        class_graph = scale(sq_l2(sub(rollout.dist, constant(y_rep))), 1.0 / denom)
        surrogate = add(surrogate, class_graph)

    zero_grads(model.params.values())
    surrogate.backward()
    grads = {k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
             for k, p in model.params.items()}
    stats = rollout.stats()
    stats["baseline"] = base
    if baseline is not None:
        baseline.update(stats["total"])
    return grads, stats
