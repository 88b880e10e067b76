"""Rationale objective: classification error + sparsity + coherence.

total = ||clas(z, x) - y||^2  +  lam1 * (selected count)  +  lam2 * (0/1 transitions)

The classifier consumes only the selected embedding rows; removed tokens
are deleted from its input rather than masked in place. An empty
selection is fed as a single all-zero embedding row so the classifier
still produces a distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, constant, sq_l2, sub
from ..autodiff.tensor import ShapeError
from ..models.cells import EncoderConfig
from ..models.classifier import classify_hidden
from ..models.encoder import encode


@dataclass(frozen=True)
class RationaleLossTerms:
    classification: float
    sparsity: float
    coherence: float
    total: float

    def __post_init__(self):
        for name in ("classification", "sparsity", "coherence"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} term must be >= 0")
        if self.total != self.classification + self.sparsity + self.coherence:
            raise ValueError("total must equal the sum of the three terms")

    @classmethod
    def make(cls, classification: float, sparsity: float,
             coherence: float) -> "RationaleLossTerms":
        classification = float(classification)
        sparsity = float(sparsity)
        coherence = float(coherence)
        return cls(classification=classification, sparsity=sparsity,
                   coherence=coherence,
                   total=classification + sparsity + coherence)


def selected_count(z) -> int:
    return int(sum(1 for v in z if v > 0.5))


def transition_count(z) -> int:
    flags = [1 if v > 0.5 else 0 for v in z]
    return sum(abs(a - b) for a, b in zip(flags, flags[1:]))


def selected_embedding_rows(x: Tensor, z) -> Tensor:
    """Rows of x where z = 1; a single zero row when nothing is selected."""
    from ..autodiff import concat, slice_rows
    picked = [slice_rows(x, t, t + 1) for t, flag in enumerate(z) if flag > 0.5]
    if not picked:
        return constant(np.zeros((1, x.data.shape[1])))
    if len(picked) == 1:
        return picked[0]
    return concat(picked, axis=0)


def clas_distribution(x_sel: Tensor, params: dict[str, Tensor],
                      clas_cfg: EncoderConfig) -> Tensor:
    """(1, 2) class distribution from the selected rows."""
    hidden = encode(x_sel, params, clas_cfg, "clas.")
    return classify_hidden(hidden, params, clas_cfg, "clas.head.")


def rationale_loss(x: Tensor, z, y_onehot: np.ndarray, params: dict[str, Tensor],
                   lam1: float, lam2: float,
                   clas_cfg: EncoderConfig) -> tuple[RationaleLossTerms, Tensor]:
    """Loss terms for one comment plus the classification-term graph node.

    The graph node is the squared error only; the sparsity and coherence
    terms are functions of the fixed z and carry no gradient.
    """
    if len(z) != x.data.shape[0]:
        raise ShapeError(f"z has length {len(z)}, x has {x.data.shape[0]} rows")
    y = np.asarray(y_onehot, dtype=np.float64).reshape(1, 2)
    dist = clas_distribution(selected_embedding_rows(x, z), params, clas_cfg)
    class_graph = sq_l2(sub(dist, constant(y)))
    terms = RationaleLossTerms.make(float(class_graph.data),
                                    lam1 * selected_count(z),
                                    lam2 * transition_count(z))
    return terms, class_graph
