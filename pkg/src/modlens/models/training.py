"""Supervised training of the comment classifier (detection step)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..autodiff import AdamState, adam_step, clip_global_norm, scale, sq_l2, sub, zero_grads
from ..autodiff.tensor import constant
from ..runlog import CONVERGED, EpochRecord, TrainingRun
from ..text import Comment, CorpusSplit, EmbeddingConfig, balanced_batches
from .cells import EncoderConfig
from .classifier import ClassifierModel


@dataclass(frozen=True)
class ClassifierTrainConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    epochs: int = 8
    batch_size: int = 64
    lr: float = 1e-3
    clip_norm: float = 5.0
    # Training-only chance of zeroing each n-gram id out of a token's mean
    # embedding. A one-character swap in an 8-12 char token leaves 43-75% of
    # its n-grams intact, so 0.35 makes training match what garbled text
    # looks like at inference.
    ngram_dropout: float = 0.35

    def __post_init__(self):
        if not 0.0 <= self.ngram_dropout < 1.0:
            raise ValueError("ngram_dropout must be in [0, 1)")

    def echo(self) -> dict:
        return {"encoder": asdict(self.encoder), "embedding": asdict(self.embedding),
                "epochs": self.epochs, "batch_size": self.batch_size,
                "lr": self.lr, "clip_norm": self.clip_norm,
                "ngram_dropout": self.ngram_dropout}


def one_hot_labels(comments: list[Comment]) -> np.ndarray:
    y = np.zeros((len(comments), 2))
    y[np.arange(len(comments)), [c.label_index for c in comments]] = 1.0
    return y


def _squared_error_loss(model: ClassifierModel, batch: list[Comment],
                        ngram_dropout: float = 0.0,
                        rng: np.random.Generator | None = None):
    dist = model.batch_distribution([c.tokens for c in batch], ngram_dropout, rng)
    target = constant(one_hot_labels(batch))
    return scale(sq_l2(sub(dist, target)), 1.0 / len(batch)), dist


def evaluate_split(model: ClassifierModel, comments: list[Comment]) -> tuple[float, float]:
    """(mean squared-error loss, accuracy) without updating anything."""
    total, correct = 0.0, 0
    for lo in range(0, len(comments), 256):
        part = comments[lo: lo + 256]
        dist = model.batch_distribution([c.tokens for c in part])
        y = one_hot_labels(part)
        total += float(((dist.data - y) ** 2).sum())
        correct += int((dist.data.argmax(axis=1) == y.argmax(axis=1)).sum())
    return total / len(comments), correct / len(comments)


def train_classifier(split: CorpusSplit, cfg: ClassifierTrainConfig,
                     seed: int) -> tuple[ClassifierModel, TrainingRun]:
    """Adam-trained classifier; keeps the epoch with the best validation loss."""
    model = ClassifierModel.build(cfg.encoder, cfg.embedding, seed)
    state = AdamState.for_params(model.params, lr=cfg.lr)
    run = TrainingRun(config=cfg.echo(), seed=seed, seeds_tried=[seed])
    best: dict[str, np.ndarray] | None = None

    for epoch in range(cfg.epochs):
        epoch_loss, n_batches = 0.0, 0
        drop_rng = np.random.default_rng([seed, 424_243, epoch])
        for batch in balanced_batches(split.train, cfg.batch_size, seed * 10_000 + epoch):
            zero_grads(model.params.values())
            loss, _ = _squared_error_loss(model, batch, cfg.ngram_dropout, drop_rng)
            loss.backward()
            grads = {k: (p.grad if p.grad is not None else np.zeros_like(p.data))
                     for k, p in model.params.items()}
            grads = clip_global_norm(grads, cfg.clip_norm)
            adam_step(model.params, grads, state)
            epoch_loss += float(loss.data)
            n_batches += 1
        val_loss, val_acc = evaluate_split(model, split.validation)
        run.epochs.append(EpochRecord(
            epoch=epoch, train_loss=epoch_loss / max(n_batches, 1), val_loss=val_loss,
            extra={"val_accuracy": val_acc}))
        if val_loss < run.best_val_loss:
            run.best_val_loss = val_loss
            run.best_epoch = epoch
            best = {k: p.data.copy() for k, p in model.params.items()}

    if best is not None:
        for k, p in model.params.items():
            p.data = best[k]
    run.status = CONVERGED
    return model, run
