"""Binary classification head and the full comment classifier bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import (
    Tensor,
    add,
    concat,
    constant,
    embed_mean,
    matmul,
    mul,
    parameter,
    slice_cols,
    slice_rows,
    softmax,
)
from ..text import Comment, EmbeddingConfig, NgramHasher, drop_ngrams, embed_tokens
from .cells import EncoderConfig, glorot
from .encoder import encode, encode_batch


@dataclass(frozen=True)
class ClassifierOutput:
    """Distribution over (appropriate, inappropriate)."""

    distribution: tuple[float, float]

    @property
    def probability(self) -> float:
        """Probability the comment is inappropriate."""
        return self.distribution[1]


def init_head(rng: np.random.Generator, in_dim: int, prefix: str = "head.") -> dict[str, Tensor]:
    return {
        f"{prefix}W": parameter(glorot(rng, in_dim, 2)),
        f"{prefix}b": parameter(np.zeros((1, 2))),
    }


def pool_states(outputs: list[Tensor], cfg: EncoderConfig,
                masks: list[Tensor] | None = None,
                lengths: np.ndarray | None = None) -> Tensor:
    """Sequence summary the head consumes.

    Final pooling takes the last forward state, concatenated with the
    first backward state for bidirectional stacks. Mean pooling averages
    positions (mask-aware on padded batches).
    """
    if cfg.pooling == "mean":
        if masks is None:
            total = outputs[0]
            for h in outputs[1:]:
                total = add(total, h)
            return mul(total, constant(np.float64(1.0 / len(outputs))))
        total = None
        for h, m in zip(outputs, masks):
            hm = mul(h, m)
            total = hm if total is None else add(total, hm)
        inv = constant((1.0 / lengths).reshape(-1, 1))
        return mul(total, inv)
    if cfg.bidirectional:
        d = cfg.hidden
        return concat([slice_cols(outputs[-1], 0, d),
                       slice_cols(outputs[0], d, 2 * d)], axis=1)
    return outputs[-1]


def head_distribution(pooled: Tensor, params: dict[str, Tensor],
                      prefix: str = "head.") -> Tensor:
    logits = add(matmul(pooled, params[f"{prefix}W"]), params[f"{prefix}b"])
    return softmax(logits)


def classify_hidden(hidden: Tensor, params: dict[str, Tensor], cfg: EncoderConfig,
                    prefix: str = "head.") -> Tensor:
    """(1, 2) class distribution from a single comment's K x H states."""
    K = hidden.data.shape[0]
    rows = [slice_rows(hidden, t, t + 1) for t in range(K)]
    pooled = pool_states(rows, cfg)
    return head_distribution(pooled, params, prefix)


def classify_comment(hidden: Tensor, params: dict[str, Tensor],
                     cfg: EncoderConfig, prefix: str = "head.") -> ClassifierOutput:
    dist = classify_hidden(hidden, params, cfg, prefix).data.reshape(2)
    return ClassifierOutput(distribution=(float(dist[0]), float(dist[1])))


def padded_steps(token_seqs: list[tuple[str, ...]], table: Tensor,
                 hasher: NgramHasher, ngram_dropout: float = 0.0,
                 rng: np.random.Generator | None = None,
                 ) -> tuple[list[Tensor], list[Tensor], np.ndarray]:
    """Embed a ragged batch into per-step (B, d) tensors plus masks.

    With ngram_dropout > 0 (training only) a random subset of each token's
    n-gram rows is zeroed out of its mean: the mean runs over the survivors
    and is rescaled by the survival fraction. That reproduces what garbled
    text does at inference, where unrecognized n-grams hit untrained
    near-zero buckets and only the familiar ones carry weight.
    """
    lengths = np.array([len(seq) for seq in token_seqs], dtype=np.int64)
    k_max = int(lengths.max())
    empty = np.empty(0, dtype=np.int64)
    steps, masks = [], []
    for t in range(k_max):
        ids = [hasher.buckets(seq[t]) if t < len(seq) else empty
               for seq in token_seqs]
        if ngram_dropout > 0.0:
            if rng is None:
                raise ValueError("ngram_dropout needs an rng")
            kept = [drop_ngrams(row, ngram_dropout, rng) for row in ids]
            survived = np.array(
                [k.size / row.size if row.size else 1.0
                 for row, k in zip(ids, kept)]).reshape(-1, 1)
            steps.append(mul(embed_mean(table, kept), constant(survived)))
        else:
            steps.append(embed_mean(table, ids))
        col = (lengths > t).astype(np.float64).reshape(-1, 1)
        masks.append(constant(col))
    return steps, masks, lengths


@dataclass
class ClassifierModel:
    """Step-1 bundle: embedding table + encoder + head, ready to score."""

    params: dict[str, Tensor]
    encoder: EncoderConfig
    embedding: EmbeddingConfig
    hasher: NgramHasher

    @classmethod
    def build(cls, encoder: EncoderConfig, embedding: EmbeddingConfig,
              seed: int) -> "ClassifierModel":
        from ..text import init_embedding_table
        from .encoder import init_encoder
        rng = np.random.default_rng(seed)
        params = {"emb.table": init_embedding_table(embedding, seed)}
        params.update(init_encoder(rng, embedding.dim, encoder, "enc."))
        params.update(init_head(rng, encoder.out_dim, "head."))
        return cls(params=params, encoder=encoder, embedding=embedding,
                   hasher=NgramHasher(embedding))

    def batch_distribution(self, token_seqs: list[tuple[str, ...]],
                           ngram_dropout: float = 0.0,
                           rng: np.random.Generator | None = None) -> Tensor:
        steps, masks, lengths = padded_steps(token_seqs, self.params["emb.table"],
                                             self.hasher, ngram_dropout, rng)
        outputs = encode_batch(steps, masks, self.params, self.encoder, "enc.")
        pooled = pool_states(outputs, self.encoder, masks, lengths)
        return head_distribution(pooled, self.params, "head.")

    def predict_proba(self, comments: list[Comment], chunk: int = 256) -> np.ndarray:
        """P(inappropriate) per comment."""
        probs = np.empty(len(comments))
        for lo in range(0, len(comments), chunk):
            part = comments[lo: lo + chunk]
            dist = self.batch_distribution([c.tokens for c in part])
            probs[lo: lo + len(part)] = dist.data[:, 1]
        return probs

    def comment_output(self, tokens: tuple[str, ...]) -> ClassifierOutput:
        x = embed_tokens(tokens, self.params["emb.table"], self.hasher)
        hidden = encode(x, self.params, self.encoder, "enc.")
        return classify_comment(hidden, self.params, self.encoder, "head.")

    def config_echo(self) -> dict:
        from dataclasses import asdict
        return {"model": "classifier", "encoder": asdict(self.encoder),
                "embedding": asdict(self.embedding)}

    def save(self, path, extra: dict | None = None) -> None:
        from ..autodiff import save_checkpoint
        config = self.config_echo()
        if extra:
            config["run"] = dict(extra)
        save_checkpoint(path, self.params, config)

    @classmethod
    def load(cls, path) -> "ClassifierModel":
        from ..autodiff import load_checkpoint
        params, config = load_checkpoint(path)
        if config.get("model") != "classifier":
            from ..autodiff.checkpoint import CheckpointError
            raise CheckpointError(f"not a classifier checkpoint: {config.get('model')!r}")
        encoder = EncoderConfig(**config["encoder"])
        embedding = EmbeddingConfig(**config["embedding"])
        return cls(params=params, encoder=encoder, embedding=embedding,
                   hasher=NgramHasher(embedding))
