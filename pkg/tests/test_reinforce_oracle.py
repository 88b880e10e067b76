"""Score-function gradient against the exact enumeration oracle."""

from __future__ import annotations

import numpy as np
import pytest

from modlens.autodiff import constant
from modlens.models import EncoderConfig, init_encoder, init_head
from modlens.rationale.exact import (
    all_patterns, enumerate_objective, exact_gradient, expected_loss,
    mc_gradient_chunks,
)
from modlens.rationale.generator import init_zlayer
from modlens.rationale.joint import JointConfig, JointModel
from modlens.rationale.reinforce import (
    RunningBaseline, estimate_generator_gradient, padded_selected_steps,
    policy_rollout,
)
from modlens.text import EmbeddingConfig

from conftest import hand_comment

GEN_CFG = EncoderConfig(cell="rcnn", hidden=3, layers=1, order=2, bidirectional=True)
CLAS_CFG = EncoderConfig(cell="rcnn", hidden=3, layers=1, order=1, bidirectional=False)
D_IN = 4
LAM1, LAM2 = 0.02, 0.04


def _tiny_params(seed=0, z_hidden=3):
    rng = np.random.default_rng(seed)
    params = {}
    params.update(init_encoder(rng, D_IN, GEN_CFG, "gen."))
    params.update(init_zlayer(rng, GEN_CFG.out_dim, z_hidden, "z."))
    params.update(init_encoder(rng, D_IN, CLAS_CFG, "clas."))
    params.update(init_head(rng, CLAS_CFG.out_dim, "clas.head."))
    return params


def _tiny_joint(seed=0, **cfg_kw):
    base = dict(
        lam1=LAM1, lam2=LAM2, samples=2, z_hidden=3,
        gen_encoder=GEN_CFG, clas_encoder=CLAS_CFG,
        embedding=EmbeddingConfig(dim=D_IN, min_n=3, max_n=4, buckets=64),
        epochs=1, batch_size=4, lr=1e-3)
    base.update(cfg_kw)
    cfg = JointConfig(**base)
    return JointModel.build(cfg, seed), cfg


def test_running_baseline_reads_before_update():
    b = RunningBaseline()
    assert b.read() == 0.0
    b.update(5.0)
    assert b.read() == 5.0
    b.update(3.0)
    np.testing.assert_allclose(b.read(), 0.99 * 5.0 + 0.01 * 3.0, rtol=1e-12)


def test_all_patterns_enumeration():
    pats = all_patterns(3)
    assert pats.shape == (8, 3)
    assert len({tuple(r) for r in pats}) == 8
    np.testing.assert_array_equal(pats[0], [0, 0, 0])
    np.testing.assert_array_equal(pats[-1], [1, 1, 1])


@pytest.mark.parametrize("conditioned", [True, False])
def test_enumeration_probability_mass(rng, conditioned):
    params = _tiny_params()
    x = constant(rng.normal(size=(3, D_IN)))
    enum = enumerate_objective(x, np.array([0.0, 1.0]), params, GEN_CFG, CLAS_CFG,
                               LAM1, LAM2, conditioned=conditioned)
    np.testing.assert_allclose(enum.probability_mass, 1.0, atol=1e-9)
    assert np.all(enum.probs >= 0)
    np.testing.assert_allclose(
        enum.totals,
        enum.class_terms + np.array(
            [LAM1 * p.sum() + LAM2 * np.abs(np.diff(p)).sum() for p in enum.patterns]),
        rtol=1e-9)
    np.testing.assert_allclose(enum.expected, float((enum.probs * enum.totals).sum()),
                               rtol=1e-12)


@pytest.mark.parametrize("conditioned", [True, False])
def test_exact_gradient_matches_finite_differences(conditioned):
    # The enumerated objective is an ordinary deterministic function of
    # the parameters, so central differences check the whole estimator.
    params = _tiny_params(seed=1)
    data_rng = np.random.default_rng(2)
    x = constant(data_rng.normal(size=(3, D_IN)))
    y = np.array([0.0, 1.0])
    grads, _ = exact_gradient(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2,
                              conditioned=conditioned)
    pick = np.random.default_rng(3)
    h = 1e-5
    checked = 0
    for name, p in params.items():
        size = p.data.size
        for idx in pick.choice(size, size=min(3, size), replace=False):
            orig = p.data.flat[idx]
            p.data.flat[idx] = orig + h
            up = expected_loss(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2,
                               conditioned=conditioned)
            p.data.flat[idx] = orig - h
            down = expected_loss(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2,
                                 conditioned=conditioned)
            p.data.flat[idx] = orig
            numeric = (up - down) / (2 * h)
            rel = abs(grads[name].flat[idx] - numeric) / (abs(numeric) + 1e-8)
            assert rel < 1e-4, f"{name}[{idx}]: {grads[name].flat[idx]} vs {numeric}"
            checked += 1
    assert checked >= 40


def test_mc_estimator_consistent_with_oracle():
    # Project i.i.d. chunk estimates on fixed directions; the t statistic
    # against the exact value stays small when the estimator is unbiased.
    params = _tiny_params(seed=4)
    data_rng = np.random.default_rng(5)
    x = constant(data_rng.normal(size=(3, D_IN)))
    y = np.array([1.0, 0.0])
    exact, _ = exact_gradient(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2)
    chunks = mc_gradient_chunks(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2,
                                chunks=24, chunk_size=64,
                                rng=np.random.default_rng(6))
    names = sorted(params)
    flat_exact = np.concatenate([exact[n].reshape(-1) for n in names])
    flat_chunks = np.concatenate([chunks[n] for n in names], axis=1)
    dir_rng = np.random.default_rng(7)
    for _ in range(3):
        v = dir_rng.normal(size=flat_exact.size)
        v /= np.linalg.norm(v)
        proj = flat_chunks @ v
        se = proj.std(ddof=1) / np.sqrt(len(proj))
        t = (proj.mean() - flat_exact @ v) / max(se, 1e-12)
        assert abs(t) < 4.5, t


def test_mc_estimator_unbiased_with_constant_baseline():
    # A constant baseline shifts weights but not the expectation.
    params = _tiny_params(seed=8)
    data_rng = np.random.default_rng(9)
    x = constant(data_rng.normal(size=(3, D_IN)))
    y = np.array([0.0, 1.0])
    exact, _ = exact_gradient(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2)
    chunks = mc_gradient_chunks(x, y, params, GEN_CFG, CLAS_CFG, LAM1, LAM2,
                                chunks=24, chunk_size=64,
                                rng=np.random.default_rng(10), baseline=0.4)
    names = sorted(params)
    flat_exact = np.concatenate([exact[n].reshape(-1) for n in names])
    flat_chunks = np.concatenate([chunks[n] for n in names], axis=1)
    v = np.random.default_rng(11).normal(size=flat_exact.size)
    v /= np.linalg.norm(v)
    proj = flat_chunks @ v
    se = proj.std(ddof=1) / np.sqrt(len(proj))
    assert abs((proj.mean() - flat_exact @ v) / max(se, 1e-12)) < 4.5


def test_policy_rollout_shapes_and_stats():
    model, cfg = _tiny_joint(seed=0)
    batch = [
        hand_comment("a", ["one", "two", "three"], "appropriate"),
        hand_comment("b", ["bad", "spam"], "inappropriate"),
    ]
    rollout = policy_rollout(batch, model, cfg, np.random.default_rng(0), cfg.samples)
    assert len(rollout.z) == cfg.samples
    assert rollout.z[0].shape == (2, 3)
    np.testing.assert_array_equal(rollout.lengths, [3, 2])
    np.testing.assert_array_equal(rollout.y, [[1.0, 0.0], [0.0, 1.0]])
    assert rollout.class_terms.shape == (cfg.samples, 2)
    np.testing.assert_allclose(
        rollout.totals, rollout.class_terms + rollout.sparsity + rollout.coherence,
        rtol=1e-12)
    stats = rollout.stats()
    assert set(stats) == {"total", "classification", "sparsity", "coherence",
                          "selected_fraction"}
    assert 0.0 <= stats["selected_fraction"] <= 1.0
    # Padding past a row's length can never be selected.
    for z in rollout.z:
        assert z[1, 2] == 0.0


def test_rollout_deterministic_for_seeded_rng():
    model, cfg = _tiny_joint(seed=1)
    batch = [hand_comment("a", ["alpha", "beta", "gamma"], "inappropriate")]
    r1 = policy_rollout(batch, model, cfg, np.random.default_rng(42), cfg.samples)
    r2 = policy_rollout(batch, model, cfg, np.random.default_rng(42), cfg.samples)
    for z1, z2 in zip(r1.z, r2.z):
        np.testing.assert_array_equal(z1, z2)
    np.testing.assert_array_equal(r1.totals, r2.totals)


def test_estimate_gradient_covers_all_params_and_updates_baseline():
    model, cfg = _tiny_joint(seed=2)
    batch = [
        hand_comment("a", ["calm", "words", "here"], "appropriate"),
        hand_comment("b", ["spam", "junk"], "inappropriate"),
    ]
    baseline = RunningBaseline()
    grads, stats = estimate_generator_gradient(
        batch, model, cfg, np.random.default_rng(1), baseline)
    assert set(grads) == set(model.params)
    for k, g in grads.items():
        assert g.shape == model.params[k].data.shape
    assert stats["baseline"] == 0.0
    assert baseline.initialized
    np.testing.assert_allclose(baseline.read(), stats["total"], rtol=1e-12)
    # The generator recurrence and the classifier head must both learn.
    assert np.abs(grads["z.wp"]).sum() > 0
    assert np.abs(grads["clas.head.W"]).sum() > 0


def test_class_term_override_detaches_classifier():
    model, cfg = _tiny_joint(seed=3)
    batch = [hand_comment("a", ["fixed", "loss", "here"], "inappropriate")]
    override = lambda comment, z: 0.5
    rollout = policy_rollout(batch, model, cfg, np.random.default_rng(2),
                             cfg.samples, class_term_override=override)
    assert rollout.dist is None
    np.testing.assert_allclose(rollout.class_terms, 0.5, rtol=1e-12)
    grads, stats = estimate_generator_gradient(
        batch, model, cfg, np.random.default_rng(2), None,
        class_term_override=override)
    for k, g in grads.items():
        if k.startswith("clas."):
            np.testing.assert_array_equal(g, np.zeros_like(g))
    np.testing.assert_allclose(stats["classification"], 0.5, rtol=1e-12)


def test_padded_selected_steps_empty_selection():
    model, _ = _tiny_joint(seed=4)
    steps, masks, lengths = padded_selected_steps(
        [(), ("word",)], model.params["emb.table"], model.hasher)
    np.testing.assert_array_equal(lengths, [1, 1])
    assert len(steps) == 1
    np.testing.assert_array_equal(steps[0].data[0], np.zeros(D_IN))
    assert np.abs(steps[0].data[1]).sum() > 0
    np.testing.assert_array_equal(masks[0].data, [[1.0], [1.0]])
