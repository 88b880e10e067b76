"""Joint training loop with the seeded-restart degeneracy protocol.

Policy-gradient training of a selector is unstable: runs collapse into
selecting every word or none. After each epoch the mean sampled selected
fraction on the validation set is checked against (high, low) thresholds;
breaching either for `degenerate_patience` consecutive checks abandons
the attempt and restarts from the next seed. Exhausting every seed yields
a run with status "failed_degenerate" rather than an exception.
"""

from __future__ import annotations

import numpy as np

from ..autodiff import AdamState, adam_step, clip_global_norm
from ..runlog import CONVERGED, FAILED_DEGENERATE, EpochRecord, TrainingRun
from ..text import Comment, CorpusSplit, balanced_batches
from .joint import JointConfig, JointModel
from .reinforce import RunningBaseline, estimate_generator_gradient, policy_rollout


def extend_seeds(seeds, count: int) -> list[int]:
    """First `count` attempt seeds, derived deterministically when short."""
    out = [int(s) for s in seeds][:count]
    while len(out) < count:
        out.append(out[-1] + 7919)
    return out


def evaluate_joint(model: JointModel, comments: list[Comment], cfg: JointConfig,
                   rng: np.random.Generator,
                   class_term_override=None) -> dict[str, float]:
    """Mean loss terms and sampled selected fraction, no parameter updates."""
    sums: dict[str, float] = {}
    seen = 0
    for lo in range(0, len(comments), cfg.batch_size):
        part = comments[lo: lo + cfg.batch_size]
        stats = policy_rollout(part, model, cfg, rng, samples=1,
                               class_term_override=class_term_override).stats()
        for key, value in stats.items():
            sums[key] = sums.get(key, 0.0) + value * len(part)
        seen += len(part)
    return {key: value / seen for key, value in sums.items()}


def _pin_bias(model: JointModel, cfg: JointConfig) -> None:
    if cfg.pin_logit_bias is not None:
        model.params["z.bp"].data[...] = cfg.pin_logit_bias


def train_joint(split: CorpusSplit, cfg: JointConfig, seeds,
                class_term_override=None) -> tuple[JointModel, TrainingRun]:
    """Train gen+clas jointly; returns the best model and its run log."""
    if not split.validation:
        raise ValueError("joint training requires a validation split")
    attempts = extend_seeds(seeds, cfg.max_restarts + 1)
    run = TrainingRun(config=cfg.echo(), seed=attempts[0], seeds_tried=[])
    model: JointModel | None = None

    for attempt, seed in enumerate(attempts):
        run.seeds_tried.append(seed)
        model = JointModel.build(cfg, seed)
        _pin_bias(model, cfg)
        state = AdamState.for_params(model.params, lr=cfg.lr)
        baseline = RunningBaseline()
        streak = 0
        degenerate = False
        best: dict[str, np.ndarray] | None = None
        best_val = float("inf")
        best_epoch = -1

        for epoch in range(cfg.epochs):
            rng = np.random.default_rng([seed, 1013904223, epoch])
            epoch_total, n_batches = 0.0, 0
            for batch in balanced_batches(split.train, cfg.batch_size,
                                          seed * 100_003 + epoch):
                grads, stats = estimate_generator_gradient(
                    batch, model, cfg, rng, baseline, class_term_override)
                grads = clip_global_norm(grads, cfg.clip_norm)
                adam_step(model.params, grads, state)
                _pin_bias(model, cfg)
                epoch_total += stats["total"]
                n_batches += 1
            val = evaluate_joint(model, split.validation, cfg,
                                 np.random.default_rng([seed, 8191, epoch]),
                                 class_term_override)
            extra = {"attempt": attempt, "seed": seed}
            extra.update(val)
            run.epochs.append(EpochRecord(
                epoch=epoch, train_loss=epoch_total / max(n_batches, 1),
                val_loss=val["total"], extra=extra))
            fraction = val["selected_fraction"]
            if fraction > cfg.degenerate_high or fraction < cfg.degenerate_low:
                streak += 1
            else:
                streak = 0
            if streak >= cfg.degenerate_patience:
                degenerate = True
                break
            if val["total"] < best_val:
                best_val = val["total"]
                best_epoch = epoch
                best = {k: p.data.copy() for k, p in model.params.items()}

        if degenerate:
            if attempt < len(attempts) - 1:
                run.restarts += 1
            continue
        if best is not None:
            for k, p in model.params.items():
                p.data = best[k]
        run.seed = seed
        run.status = CONVERGED
        run.best_val_loss = best_val
        run.best_epoch = best_epoch
        return model, run

    run.status = FAILED_DEGENERATE
    return model, run
