"""Exact enumeration of the rationale objective for short comments.

For K tokens there are 2^K possible selections, so E[loss] and its
gradient can be computed in closed form:

    E[loss]        = sum_z p(z|x) * loss(z)
    d E[loss]/dθ   = sum_z loss(z) * p(z|x) * d log p(z|x)/dθ   (generator)
                   + sum_z p(z|x) * d loss(z)/dθ                (classifier)

These are the ground truth the sampled policy-gradient estimator is
checked against. Everything here works on a raw K x d input matrix; no
embedding table is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    bernoulli_log_prob,
    concat,
    constant,
    mul,
    scale,
    slice_rows,
    sq_l2,
    sub,
    tsum,
    zero_grads,
)
from ..models.cells import EncoderConfig
from ..models.classifier import head_distribution, pool_states
from ..models.encoder import encode, encode_batch
from .generator import run_zlayer
from .loss import selected_count, transition_count


def all_patterns(k: int) -> np.ndarray:
    """(2^k, k) matrix of every binary selection, lexicographic."""
    return np.array(list(product((0.0, 1.0), repeat=k)))


def _clas_distribution_batch(x_rows: np.ndarray, patterns: np.ndarray,
                             params: dict[str, Tensor],
                             clas_cfg: EncoderConfig) -> Tensor:
    """Classifier output for every pattern's selected rows, padded batch."""
    selected = [np.flatnonzero(row > 0.5) for row in patterns]
    lengths = np.array([max(1, len(idx)) for idx in selected], dtype=np.int64)
    k_max = int(lengths.max())
    d = x_rows.shape[1]
    steps, masks = [], []
    for t in range(k_max):
        rows = np.stack([x_rows[idx[t]] if t < len(idx) else np.zeros(d)
                         for idx in selected])
        steps.append(constant(rows))
        masks.append(constant((lengths > t).astype(np.float64).reshape(-1, 1)))
    outs = encode_batch(steps, masks, params, clas_cfg, "clas.")
    pooled = pool_states(outs, clas_cfg, masks, lengths)
    return head_distribution(pooled, params, "clas.head.")


@dataclass
class EnumeratedObjective:
    """The full 2^K decomposition of one comment's objective."""

    patterns: np.ndarray          # (2^K, K)
    probs: np.ndarray             # (2^K,) path probabilities
    class_terms: np.ndarray       # (2^K,)
    totals: np.ndarray            # (2^K,) loss per pattern
    expected: float               # sum p * total
    logp_rows: Tensor             # (2^K, K) per-step log-prob graph
    sqerr: Tensor                 # (2^K, 2) per-entry squared error graph

    @property
    def probability_mass(self) -> float:
        return float(self.probs.sum())


def enumerate_objective(x: Tensor, y_onehot: np.ndarray, params: dict[str, Tensor],
                        gen_cfg: EncoderConfig, clas_cfg: EncoderConfig,
                        lam1: float, lam2: float, *,
                        conditioned: bool = True) -> EnumeratedObjective:
    k = x.data.shape[0]
    patterns = all_patterns(k)
    n = patterns.shape[0]
    h = encode(x, params, gen_cfg, "gen.")
    rows = [slice_rows(h, t, t + 1) for t in range(k)]
    outs = [concat([rows[t]] * n, axis=0) for t in range(k)]
    _, logits, _ = run_zlayer(outs, params, conditioned=conditioned,
                              mode="given", given=patterns)
    logp_rows = concat([bernoulli_log_prob(logits[t], patterns[:, t:t + 1])
                        for t in range(k)], axis=1)
    probs = np.exp(logp_rows.data.sum(axis=1))

    y = np.asarray(y_onehot, dtype=np.float64).reshape(1, 2)
    dist = _clas_distribution_batch(x.data, patterns, params, clas_cfg)
    diff = sub(dist, constant(np.tile(y, (n, 1))))
    sqerr = mul(diff, diff)
    class_terms = sqerr.data.sum(axis=1)
    reg = np.array([lam1 * selected_count(p) + lam2 * transition_count(p)
                    for p in patterns])
    totals = class_terms + reg
    return EnumeratedObjective(patterns=patterns, probs=probs,
                               class_terms=class_terms, totals=totals,
                               expected=float((probs * totals).sum()),
                               logp_rows=logp_rows, sqerr=sqerr)


def expected_loss(x: Tensor, y_onehot: np.ndarray, params: dict[str, Tensor],
                  gen_cfg: EncoderConfig, clas_cfg: EncoderConfig,
                  lam1: float, lam2: float, *, conditioned: bool = True) -> float:
    return enumerate_objective(x, y_onehot, params, gen_cfg, clas_cfg,
                               lam1, lam2, conditioned=conditioned).expected


def exact_gradient(x: Tensor, y_onehot: np.ndarray, params: dict[str, Tensor],
                   gen_cfg: EncoderConfig, clas_cfg: EncoderConfig,
                   lam1: float, lam2: float, *,
                   conditioned: bool = True) -> tuple[dict[str, np.ndarray], float]:
    """(exact gradient of E[loss] per parameter, E[loss] itself)."""
    enum = enumerate_objective(x, y_onehot, params, gen_cfg, clas_cfg,
                               lam1, lam2, conditioned=conditioned)
    k = enum.patterns.shape[1]
    gen_weights = np.repeat((enum.probs * enum.totals).reshape(-1, 1), k, axis=1)
    goal = add(tsum(mul(enum.logp_rows, constant(gen_weights))),
               tsum(mul(enum.sqerr, constant(enum.probs.reshape(-1, 1)))))
    zero_grads(params.values())
    goal.backward()
    grads = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
             for name, p in params.items()}
    return grads, enum.expected


def mc_gradient_chunks(x: Tensor, y_onehot: np.ndarray, params: dict[str, Tensor],
                       gen_cfg: EncoderConfig, clas_cfg: EncoderConfig,
                       lam1: float, lam2: float, *, conditioned: bool = True,
                       chunks: int, chunk_size: int, rng: np.random.Generator,
                       baseline: float = 0.0) -> dict[str, np.ndarray]:
    """Per-chunk sampled gradient estimates, for comparison with the oracle.

    Each chunk is one independent estimate from ``chunk_size`` draws, so
    the rows of each returned (chunks, param size) array are i.i.d. and
    their spread estimates the Monte-Carlo error. The baseline must stay
    constant or the estimator's unbiasedness is lost.
    """
    k, d = x.data.shape
    y = np.asarray(y_onehot, dtype=np.float64).reshape(1, 2)
    out: dict[str, list[np.ndarray]] = {name: [] for name in params}
    for _ in range(chunks):
        steps = [constant(np.tile(x.data[t], (chunk_size, 1))) for t in range(k)]
        outs = encode_batch(steps, None, params, gen_cfg, "gen.")
        z, logits, _ = run_zlayer(outs, params, conditioned=conditioned,
                                  mode="sample", rng=rng)
        dist = _clas_distribution_batch(x.data, z, params, clas_cfg)
        y_rep = np.tile(y, (chunk_size, 1))
        class_terms = ((dist.data - y_rep) ** 2).sum(axis=1)
        reg = np.array([lam1 * selected_count(row) + lam2 * transition_count(row)
                        for row in z])
        weights = ((class_terms + reg - baseline) / chunk_size).reshape(-1, 1)
        w = constant(weights)
        terms = [mul(bernoulli_log_prob(logits[t], z[:, t:t + 1]), w)
                 for t in range(k)]
        surrogate = add(tsum(concat(terms, axis=1)),
                        scale(sq_l2(sub(dist, constant(y_rep))), 1.0 / chunk_size))
        zero_grads(params.values())
        surrogate.backward()
        for name, p in params.items():
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            out[name].append(g.reshape(-1).copy())
    return {name: np.stack(rows) for name, rows in out.items()}
