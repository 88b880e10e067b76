"""Training-run records and their line-delimited log format."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

CONVERGED = "converged"
FAILED_DEGENERATE = "failed_degenerate"


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    extra: dict = field(default_factory=dict)


@dataclass
class TrainingRun:
    """What happened during one training invocation."""

    config: dict
    seed: int
    epochs: list[EpochRecord] = field(default_factory=list)
    restarts: int = 0
    status: str = CONVERGED
    best_val_loss: float = float("inf")
    best_epoch: int = -1
    seeds_tried: list[int] = field(default_factory=list)

    def to_records(self) -> list[dict]:
        """Line-delimited form: one summary record plus one per epoch."""
        rows = [{
            "kind": "summary",
            "config": self.config,
            "seed": self.seed,
            "restarts": self.restarts,
            "status": self.status,
            "best_val_loss": self.best_val_loss,
            "best_epoch": self.best_epoch,
            "seeds_tried": self.seeds_tried,
        }]
        for rec in self.epochs:
            row = {"kind": "epoch", "epoch": rec.epoch,
                   "train_loss": rec.train_loss, "val_loss": rec.val_loss}
            row.update(rec.extra)
            rows.append(row)
        return rows


def write_training_log(path: str | Path, run: TrainingRun) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in run.to_records():
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")
