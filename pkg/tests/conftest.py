"""Shared fixtures: tiny corpora and quickly trained micro models.

The micro models exist so service/report/saliency tests exercise real
trained artifacts without paying full training cost; they are not meant
to hit quality targets (the acceptance suite owns those).
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from modlens.models import ClassifierTrainConfig, EncoderConfig, train_classifier
from modlens.rationale import JointConfig, JointModel, train_joint
from modlens.text import (
    Comment,
    CorpusSplit,
    EmbeddingConfig,
    SyntheticSpec,
    generate_synthetic_corpus,
    split_corpus,
)

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("suite")


MICRO_EMBEDDING = EmbeddingConfig(dim=16, min_n=3, max_n=4, buckets=512)


def micro_spec(comments: int = 240) -> SyntheticSpec:
    return SyntheticSpec(
        comments=comments,
        benign_vocab=60,
        toxic_count=6,
        min_tokens=5,
        max_tokens=10,
        phrase_fraction=0.3,
    )


@pytest.fixture(scope="session")
def micro_corpus() -> list[Comment]:
    return generate_synthetic_corpus(micro_spec(), seed=5)


@pytest.fixture(scope="session")
def micro_split(micro_corpus) -> CorpusSplit:
    return split_corpus(micro_corpus, val_size=40, test_size=40, seed=5)


@pytest.fixture(scope="session")
def micro_classifier(micro_split):
    cfg = ClassifierTrainConfig(
        encoder=EncoderConfig(cell="rcnn", hidden=8, layers=1, order=2,
                              bidirectional=True, pooling="final"),
        embedding=MICRO_EMBEDDING,
        epochs=10,
        batch_size=20,
        lr=5e-3,
    )
    model, run = train_classifier(micro_split, cfg, seed=1)
    assert run.status == "converged"
    return model, run


@pytest.fixture(scope="session")
def micro_joint(micro_split):
    cfg = JointConfig(
        lam1=3e-3,
        lam2=6e-3,
        samples=2,
        max_restarts=2,
        z_hidden=8,
        gen_encoder=EncoderConfig(cell="rcnn", hidden=8, layers=1, order=2,
                                  bidirectional=True),
        clas_encoder=EncoderConfig(cell="rcnn", hidden=8, layers=1, order=2,
                                   bidirectional=False),
        embedding=MICRO_EMBEDDING,
        epochs=3,
        batch_size=20,
        lr=5e-3,
    )
    model, run = train_joint(micro_split, cfg, seeds=[3])
    assert model is not None
    return model, run


def hand_comment(id: str, tokens: list[str], label: str,
                 gold: tuple[int, ...] | None = None) -> Comment:
    return Comment(id=id, tokens=tuple(tokens), label=label,
                   gold_spans=gold, text=" ".join(tokens))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
