"""Joint training loop: restart protocol, degeneracy detection, configs."""

from __future__ import annotations

import numpy as np
import pytest

from modlens.autodiff.checkpoint import CheckpointError
from modlens.models import EncoderConfig
from modlens.rationale import JointConfig, JointModel, train_joint
from modlens.rationale.joint import joint_config_from_dict
from modlens.rationale.train import evaluate_joint, extend_seeds
from modlens.runlog import CONVERGED, FAILED_DEGENERATE
from modlens.text import EmbeddingConfig

TINY_GEN = EncoderConfig(cell="rcnn", hidden=4, layers=1, order=2, bidirectional=True)
TINY_CLAS = EncoderConfig(cell="rcnn", hidden=4, layers=1, order=2, bidirectional=False)
TINY_EMB = EmbeddingConfig(dim=8, min_n=3, max_n=4, buckets=256)


def _tiny_cfg(**kw):
    base = dict(
        lam1=3e-3, lam2=6e-3, samples=1, max_restarts=0, z_hidden=4,
        gen_encoder=TINY_GEN, clas_encoder=TINY_CLAS, embedding=TINY_EMB,
        epochs=1, batch_size=20, lr=5e-3)
    base.update(kw)
    return JointConfig(**base)


# Fixed class term: the generator still gets REINFORCE signal from the
# sparsity/coherence penalties while the classifier pass is skipped,
# which keeps these protocol tests fast.
_FLAT = lambda comment, z: 0.25


def test_extend_seeds():
    assert extend_seeds([3], 3) == [3, 7922, 15841]
    assert extend_seeds([5, 6, 7], 2) == [5, 6]
    assert extend_seeds([5, 9], 4) == [5, 9, 7928, 15847]


def test_config_validation():
    with pytest.raises(ValueError):
        _tiny_cfg(lam1=-0.1)
    with pytest.raises(ValueError):
        _tiny_cfg(lam2=-0.1)
    with pytest.raises(ValueError):
        _tiny_cfg(samples=0)
    with pytest.raises(ValueError):
        _tiny_cfg(z_hidden=0)
    with pytest.raises(ValueError):
        _tiny_cfg(epochs=0)
    with pytest.raises(ValueError):
        _tiny_cfg(max_restarts=-1)
    with pytest.raises(ValueError):
        _tiny_cfg(degenerate_patience=0)
    with pytest.raises(ValueError):
        _tiny_cfg(degenerate_low=0.6, degenerate_high=0.5)
    with pytest.raises(ValueError):
        _tiny_cfg(degenerate_low=0.0)
    # Zero regularizers are legal (they just remove the penalties).
    assert _tiny_cfg(lam1=0.0, lam2=0.0).lam1 == 0.0


def test_preferred_regularizer_band():
    assert _tiny_cfg(lam1=1e-3, lam2=2e-3).preferred_regularizer_band
    assert _tiny_cfg(lam1=3e-3, lam2=6e-3).preferred_regularizer_band
    assert not _tiny_cfg(lam1=1e-4, lam2=2e-4).preferred_regularizer_band
    assert not _tiny_cfg(lam1=1e-3, lam2=5e-3).preferred_regularizer_band


def test_config_round_trip_through_dict():
    cfg = _tiny_cfg(pin_logit_bias=2.0)
    assert joint_config_from_dict(cfg.echo()) == cfg


def test_requires_validation_split(micro_split):
    from modlens.text import CorpusSplit
    empty_val = CorpusSplit(train=micro_split.train, validation=[], test=[])
    with pytest.raises(ValueError, match="validation"):
        train_joint(empty_val, _tiny_cfg(), seeds=[0])


def test_pinned_bias_trips_degeneracy_within_patience(micro_split):
    # Forcing the selection bias high keeps the sampled fraction ~1, so
    # every attempt must be abandoned after exactly `patience` checks.
    cfg = _tiny_cfg(pin_logit_bias=8.0, degenerate_patience=2, epochs=5,
                    max_restarts=1)
    model, run = train_joint(micro_split, cfg, seeds=[0],
                             class_term_override=_FLAT)
    assert run.status == FAILED_DEGENERATE
    assert model is not None
    assert run.restarts == 1
    assert run.seeds_tried == [0, 7919]
    # Each attempt ran exactly `patience` epochs before giving up.
    assert len(run.epochs) == 2 * cfg.degenerate_patience
    for rec in run.epochs:
        assert rec.extra["selected_fraction"] > cfg.degenerate_high
    # The pin is reasserted after every update.
    np.testing.assert_array_equal(model.params["z.bp"].data, 8.0)


def test_pinned_low_bias_trips_low_threshold(micro_split):
    cfg = _tiny_cfg(pin_logit_bias=-8.0, degenerate_patience=1, epochs=3,
                    max_restarts=0)
    _, run = train_joint(micro_split, cfg, seeds=[1], class_term_override=_FLAT)
    assert run.status == FAILED_DEGENERATE
    assert len(run.epochs) == 1
    assert run.epochs[0].extra["selected_fraction"] < cfg.degenerate_low


def test_healthy_run_converges(micro_split, micro_joint):
    _, run = micro_joint
    assert run.status == CONVERGED
    assert run.restarts == 0
    assert run.seeds_tried[0] == 3
    assert run.seed == 3
    assert run.best_epoch >= 0
    assert np.isfinite(run.best_val_loss)
    for rec in run.epochs:
        assert set(rec.extra) >= {"attempt", "seed", "total", "classification",
                                  "sparsity", "coherence", "selected_fraction"}


def test_training_deterministic(micro_split):
    cfg = _tiny_cfg(epochs=1)
    m1, r1 = train_joint(micro_split, cfg, seeds=[2], class_term_override=_FLAT)
    m2, r2 = train_joint(micro_split, cfg, seeds=[2], class_term_override=_FLAT)
    for k in m1.params:
        np.testing.assert_array_equal(m1.params[k].data, m2.params[k].data)
    assert [e.val_loss for e in r1.epochs] == [e.val_loss for e in r2.epochs]


def test_evaluate_joint_does_not_update(micro_split):
    model = JointModel.build(_tiny_cfg(), seed=0)
    before = {k: p.data.copy() for k, p in model.params.items()}
    stats = evaluate_joint(model, micro_split.validation, _tiny_cfg(),
                           np.random.default_rng(0))
    for k, p in model.params.items():
        np.testing.assert_array_equal(p.data, before[k])
    assert set(stats) >= {"total", "selected_fraction"}
    np.testing.assert_allclose(
        stats["total"],
        stats["classification"] + stats["sparsity"] + stats["coherence"],
        rtol=1e-9)


def test_joint_save_load_round_trip(tmp_path):
    model = JointModel.build(_tiny_cfg(), seed=6)
    path = tmp_path / "joint.mdln"
    model.save(path, extra={"status": "converged"})
    loaded = JointModel.load(path)
    assert loaded.config == model.config
    assert set(loaded.params) == set(model.params)
    for k in model.params:
        np.testing.assert_array_equal(loaded.params[k].data, model.params[k].data)


def test_joint_load_rejects_other_checkpoints(tmp_path):
    from modlens.autodiff import parameter, save_checkpoint
    path = tmp_path / "clf.mdln"
    save_checkpoint(path, {"w": parameter(np.zeros((1, 1)))}, {"model": "classifier"})
    with pytest.raises(CheckpointError, match="not a joint"):
        JointModel.load(path)


def test_joint_param_namespaces():
    model = JointModel.build(_tiny_cfg(), seed=0)
    names = set(model.params)
    assert "emb.table" in names
    assert any(k.startswith("gen.l0.f.") for k in names)
    assert any(k.startswith("gen.l0.b.") for k in names)
    assert {"z.Wh", "z.Wz", "z.U", "z.b", "z.wp", "z.bp"} <= names
    assert any(k.startswith("clas.l0.f.") for k in names)
    assert not any(k.startswith("clas.l0.b.") for k in names)
    assert {"clas.head.W", "clas.head.b"} <= names
