"""Command-line behavior: artifacts, exit codes, config precedence."""

import json
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

from modlens import __version__
from modlens.cli import main
from modlens.models import ClassifierModel
from modlens.service import InvalidComment, ModelScorer
from modlens.text import load_corpus

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

SYNTH_FLAGS = [
    "--comments", "120", "--benign-vocab", "40", "--toxic", "4",
    "--min-tokens", "4", "--max-tokens", "9", "--phrase-fraction", "0.3",
    "--seed", "9",
]

TINY_NET = [
    "--cell", "rcnn", "--hidden", "6", "--layers", "1", "--order", "2",
    "--dim", "12", "--buckets", "256", "--min-n", "3", "--max-n", "4",
]


def _invoke(args, env=None, input=None):
    runner = CliRunner()
    return runner.invoke(main, args, env=env, input=input,
                         catch_exceptions=False)


def _read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines()]


@pytest.fixture(autouse=True)
def _no_ambient_settings(monkeypatch):
    # Stray MODLENS_* variables would leak into resolution.
    for key in list(os.environ):
        if key.startswith("MODLENS_"):
            monkeypatch.delenv(key)


@pytest.fixture(scope="module")
def cli_art(tmp_path_factory):
    """One synthesized corpus and one trained classifier, via the CLI."""
    mp = pytest.MonkeyPatch()
    for key in list(os.environ):
        if key.startswith("MODLENS_"):
            mp.delenv(key)
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.jsonl"
    res = _invoke(["synth", "--out", str(corpus), *SYNTH_FLAGS])
    assert res.exit_code == 0, res.output
    clf = root / "clf.mdln"
    res = _invoke([
        "train-classifier", "--corpus", str(corpus), "--out", str(clf),
        *TINY_NET, "--epochs", "2", "--batch-size", "20", "--lr", "5e-3",
        "--val-size", "20", "--test-size", "20", "--seed", "1",
    ])
    assert res.exit_code == 0, res.output
    yield {"root": root, "corpus": corpus, "clf": clf,
           "train_output": res.output}
    mp.undo()


@pytest.fixture(scope="module")
def joint_ckpt(tmp_path_factory, micro_joint):
    model, _ = micro_joint
    path = tmp_path_factory.mktemp("cli_joint") / "joint.mdln"
    model.save(path)
    return path


# -- group-level behavior ----------------------------------------------------

def test_version():
    res = _invoke(["--version"])
    assert res.exit_code == 0
    assert res.output.strip() == f"modlens {__version__}"


def test_help_lists_all_commands():
    res = _invoke(["--help"])
    assert res.exit_code == 0
    for name in ("synth", "train-classifier", "train-rationale", "evaluate",
                 "highlight", "serve"):
        assert name in res.output


# -- synth --------------------------------------------------------------------

def test_synth_corpus_and_sidecar(cli_art):
    corpus = load_corpus(cli_art["corpus"])
    assert len(corpus) == 120
    assert {c.label for c in corpus} == {"appropriate", "inappropriate"}
    meta = json.loads((cli_art["root"] / "corpus.jsonl.meta.json").read_text())
    assert meta["command"] == "synth"
    assert meta["values"]["comments"] == 120
    assert meta["provenance"]["comments"] == "flag"
    assert meta["values"]["inappropriate-fraction"] == 0.5
    assert meta["provenance"]["inappropriate-fraction"] == "default"


def test_synth_deterministic(tmp_path):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"]
    for path in paths[:2]:
        res = _invoke(["synth", "--out", str(path), *SYNTH_FLAGS])
        assert res.exit_code == 0
    res = _invoke(["synth", "--out", str(paths[2]), *SYNTH_FLAGS[:-1], "10"])
    assert res.exit_code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_bytes() != paths[2].read_bytes()


def test_config_dump_does_no_work(tmp_path):
    out = tmp_path / "never.jsonl"
    res = _invoke(["synth", "--out", str(out), "--config-dump"])
    assert res.exit_code == 0
    echo = json.loads(res.output)
    assert echo["command"] == "synth"
    assert echo["values"]["out"] == str(out)
    assert not out.exists()


# -- configuration layering ----------------------------------------------------

def test_layer_precedence(tmp_path):
    cfg_path = tmp_path / "modlens.json"
    cfg_path.write_text(json.dumps({"synth": {"seed": 5, "comments": 50}}))
    env = {"MODLENS_COMMENTS": "77", "MODLENS_SEED": "99",
           "MODLENS_MIN_TOKENS": "4"}
    res = _invoke(["--config", str(cfg_path), "synth",
                   "--out", str(tmp_path / "p.jsonl"),
                   "--comments", "33", "--config-dump"], env=env)
    assert res.exit_code == 0, res.output
    echo = json.loads(res.output)
    values, sources = echo["values"], echo["provenance"]
    # Flag beats file, file beats environment, environment beats default.
    assert (values["comments"], sources["comments"]) == (33, "flag")
    assert (values["seed"], sources["seed"]) == (5, "file")
    assert (values["min-tokens"], sources["min-tokens"]) == (4, "env")
    assert (values["max-tokens"], sources["max-tokens"]) == (18, "default")


def test_config_path_env_fallback(tmp_path):
    cfg_path = tmp_path / "modlens.json"
    cfg_path.write_text(json.dumps({"synth": {"seed": 5}}))
    res = _invoke(["synth", "--out", str(tmp_path / "p.jsonl"),
                   "--config-dump"], env={"MODLENS_CONFIG": str(cfg_path)})
    assert res.exit_code == 0, res.output
    echo = json.loads(res.output)
    assert echo["values"]["seed"] == 5
    assert echo["provenance"]["seed"] == "file"


def test_env_coercion_error_exits_2(tmp_path):
    res = _invoke(["synth", "--out", str(tmp_path / "x.jsonl")],
                  env={"MODLENS_COMMENTS": "abc"})
    assert res.exit_code == 2
    assert "MODLENS_COMMENTS" in res.stderr


def test_config_file_errors_exit_2(tmp_path):
    out = ["synth", "--out", str(tmp_path / "x.jsonl"), "--config-dump"]

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert _invoke(["--config", str(broken), *out]).exit_code == 2

    bad_section = tmp_path / "section.json"
    bad_section.write_text(json.dumps({"sorting": {}}))
    assert _invoke(["--config", str(bad_section), *out]).exit_code == 2

    bad_key = tmp_path / "key.json"
    bad_key.write_text(json.dumps({"synth": {"commments": 1}}))
    res = _invoke(["--config", str(bad_key), *out])
    assert res.exit_code == 2
    assert "commments" in res.stderr


def test_domain_value_error_exits_2(tmp_path):
    out = tmp_path / "x.jsonl"
    res = _invoke(["synth", "--out", str(out), "--min-tokens", "2"])
    assert res.exit_code == 2
    assert not out.exists()


def test_missing_required_option_exits_2():
    res = _invoke(["synth"])
    assert res.exit_code == 2
    assert "out" in res.stderr


# -- train-classifier -----------------------------------------------------------

def test_train_classifier_artifacts(cli_art):
    assert "status converged" in cli_art["train_output"]
    clf = cli_art["clf"]
    model = ClassifierModel.load(clf)
    assert model.encoder.hidden == 6

    meta = json.loads((Path(str(clf) + ".meta.json")).read_text())
    assert meta["command"] == "train-classifier"
    assert meta["values"]["epochs"] == 2
    assert meta["values"]["bidirectional"] is True
    assert meta["provenance"]["bidirectional"] == "default"

    rows = _read_jsonl(str(clf) + ".log.jsonl")
    assert rows[0]["kind"] == "summary"
    assert rows[0]["status"] == "converged"
    epochs = [r for r in rows[1:] if r["kind"] == "epoch"]
    assert len(epochs) == 2
    assert all("val_accuracy" in r for r in epochs)


def test_missing_corpus_exits_4(tmp_path):
    res = _invoke(["train-classifier", "--corpus", str(tmp_path / "nope.jsonl"),
                   "--out", str(tmp_path / "x.mdln")])
    assert res.exit_code == 4
    assert "not found" in res.stderr


def test_malformed_corpus_exits_4(tmp_path):
    bad = tmp_path / "bad.jsonl"
    good_line = json.dumps({"id": "a1", "text": "all good here",
                            "label": "appropriate"})
    bad.write_text(good_line + "\n{broken\n")
    res = _invoke(["train-classifier", "--corpus", str(bad),
                   "--out", str(tmp_path / "x.mdln")])
    assert res.exit_code == 4
    assert ":2:" in res.stderr


def test_odd_split_size_exits_2(cli_art, tmp_path):
    res = _invoke(["train-classifier", "--corpus", str(cli_art["corpus"]),
                   "--out", str(tmp_path / "x.mdln"), "--val-size", "21"])
    assert res.exit_code == 2


# -- train-rationale -------------------------------------------------------------

def test_train_rationale_degenerate_exits_3(cli_art, tmp_path):
    out = tmp_path / "joint_fail.mdln"
    log = tmp_path / "fail.log.jsonl"
    # A collapse window this tight cannot be satisfied, so the run must
    # exhaust its restarts and report failure, keeping the log.
    res = _invoke([
        "train-rationale", "--corpus", str(cli_art["corpus"]),
        "--out", str(out), "--log", str(log),
        "--samples", "1", "--max-restarts", "0", "--z-hidden", "4",
        "--degenerate-low", "0.499", "--degenerate-high", "0.501",
        "--degenerate-patience", "1",
        "--cell", "rcnn", "--hidden", "4", "--layers", "1", "--order", "2",
        "--dim", "8", "--buckets", "128", "--min-n", "3", "--max-n", "4",
        "--epochs", "1", "--batch-size", "20",
        "--val-size", "20", "--test-size", "20", "--seed", "0",
    ])
    assert res.exit_code == 3
    assert "degenerate" in res.stderr
    assert not out.exists()
    rows = _read_jsonl(log)
    assert rows[0]["status"] == "failed_degenerate"
    assert rows[0]["seeds_tried"] == [0]
    assert len([r for r in rows if r["kind"] == "epoch"]) == 1


# -- evaluate ---------------------------------------------------------------------

def test_evaluate_bundle(cli_art, joint_ckpt, tmp_path):
    out = tmp_path / "report"
    res = _invoke([
        "evaluate", "--classifier", str(cli_art["clf"]),
        "--joint", f"named={joint_ckpt}", "--corpus", str(cli_art["corpus"]),
        "--out", str(out), "--saliency-fractions", "0.1,0.2",
        "--val-size", "20", "--test-size", "20", "--seed", "1",
    ])
    assert res.exit_code == 0, res.output
    assert "bundle" in res.output

    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["count"] == 20
    assert 0.0 <= metrics["auc"] <= 1.0

    rows = _read_jsonl(out / "report.jsonl")
    assert rows[0]["kind"] == "classification"
    methods = {r["method"] for r in rows if r["kind"] == "highlight_point"}
    assert "rationale:named" in methods
    assert "saliency@0.1" in methods

    roc_lines = (out / "roc.csv").read_text().splitlines()
    assert roc_lines[0] == "fpr,tpr"
    assert len(roc_lines) > 2
    assert (out / "highlight_series.csv").exists()

    for name in ("roc.png", "highlights.png"):
        blob = (out / name).read_bytes()
        assert blob[:8] == PNG_MAGIC and len(blob) > 1000

    cfg = json.loads((out / "config.json").read_text())
    assert cfg["command"] == "evaluate"
    assert cfg["values"]["saliency-fractions"] == [0.1, 0.2]


def test_evaluate_whole_corpus_and_stem_label(cli_art, joint_ckpt, tmp_path):
    out = tmp_path / "report_all"
    res = _invoke([
        "evaluate", "--classifier", str(cli_art["clf"]),
        "--joint", str(joint_ckpt), "--corpus", str(cli_art["corpus"]),
        "--out", str(out), "--saliency-fractions", "0.1",
        "--val-size", "0", "--test-size", "0",
    ])
    assert res.exit_code == 0, res.output
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["count"] == 120
    rows = _read_jsonl(out / "report.jsonl")
    methods = {r["method"] for r in rows if r["kind"] == "highlight_point"}
    # A bare checkpoint path is labeled by its file stem.
    assert "rationale:joint" in methods


def test_evaluate_rejects_bad_checkpoints(cli_art, joint_ckpt, tmp_path):
    garbage = tmp_path / "garbage.mdln"
    garbage.write_bytes(b"not a checkpoint at all")
    base = ["evaluate", "--corpus", str(cli_art["corpus"]),
            "--out", str(tmp_path / "r")]
    res = _invoke([*base, "--classifier", str(garbage)])
    assert res.exit_code == 4
    # A joint checkpoint is not interchangeable with a classifier one.
    res = _invoke([*base, "--classifier", str(joint_ckpt)])
    assert res.exit_code == 4
    assert "classifier" in res.stderr


# -- highlight ----------------------------------------------------------------------

def test_highlight_scores_stdin(cli_art, joint_ckpt):
    text_a = "you are a fine person"
    text_b = "bad apples everywhere"
    res = _invoke(["highlight", "--classifier", str(cli_art["clf"]),
                   "--joint", str(joint_ckpt)],
                  input=f"{text_a}\n\n   \n{text_b}\n")
    assert res.exit_code == 0, res.output
    records = [json.loads(line) for line in res.output.splitlines()]
    assert [r["text"] for r in records] == [text_a, text_b]
    for rec in records:
        assert set(rec) == {"text", "probability", "spans", "token_spans"}
        assert 0.0 <= rec["probability"] <= 1.0
        assert len(rec["spans"]) == len(rec["token_spans"])
        for start, end in rec["spans"]:
            assert 0 <= start < end <= len(rec["text"])


def test_highlight_emits_error_records(monkeypatch):
    class _Rejecting:
        def score(self, text):
            raise InvalidComment("rejected")

    monkeypatch.setattr(ModelScorer, "load",
                        classmethod(lambda cls, c, j=None: _Rejecting()))
    res = _invoke(["highlight", "--classifier", "x", "--joint", "y"],
                  input="hello there\n")
    assert res.exit_code == 0
    assert json.loads(res.output) == {"error": "rejected",
                                      "text": "hello there"}


# -- serve ---------------------------------------------------------------------------

def test_serve_config_dump_short_circuits(tmp_path):
    data_dir = tmp_path / "never_created"
    res = _invoke(["serve", "--classifier", "missing.mdln",
                   "--data-dir", str(data_dir), "--config-dump"])
    assert res.exit_code == 0, res.output
    echo = json.loads(res.output)
    assert echo["command"] == "serve"
    assert echo["values"]["host"] == "127.0.0.1"
    assert echo["values"]["snapshot-every"] == 256
    assert not data_dir.exists()
