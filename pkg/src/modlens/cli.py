"""Command-line entry point for the moderation toolkit.

Subcommands: synth, train-classifier, train-rationale, evaluate,
highlight, serve. Every option resolves as flag > config file >
MODLENS_* environment variable > default, and each artifact gets the
resolved config embedded (checkpoints) or written alongside it
(`<artifact>.meta.json`).

Exit codes: 0 success, 2 configuration error, 3 training failure
(every restart degenerate), 4 I/O error (missing, malformed, or
unwritable files).
"""

from __future__ import annotations

import functools
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click
from click.core import ParameterSource

from . import __version__
from .autodiff.checkpoint import CheckpointError
from .config import (
    ConfigError,
    OptionSpec,
    RunConfig,
    load_config_file,
    parse_bool,
    parse_fractions,
    resolve,
    write_sidecar,
)
from .runlog import FAILED_DEGENERATE, write_training_log
from .text.corpus import CorpusError, CorpusFormatError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRAINING = 3
EXIT_IO = 4

KNOWN_COMMANDS = (
    "synth", "train-classifier", "train-rationale", "evaluate", "highlight", "serve",
)


@dataclass(frozen=True)
class CliOption:
    """One setting: resolution spec plus its click declaration."""

    spec: OptionSpec
    decls: tuple[str, ...]
    kwargs: dict

    @property
    def param(self) -> str:
        return self.spec.name.replace("-", "_")


def _opt(name: str, cast, default=None, *, required: bool = False,
         decls: tuple[str, ...] | None = None, **kwargs) -> CliOption:
    spec = OptionSpec(name=name, cast=cast, default=default, required=required)
    return CliOption(spec=spec, decls=decls or (f"--{name}",), kwargs=kwargs)


def _paths(value: Any) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return tuple(p.strip() for p in str(value).split(",") if p.strip())


def apply_options(options: list[CliOption]):
    def deco(fn):
        for opt in reversed(options):
            default = () if opt.kwargs.get("multiple") else opt.spec.default
            fn = click.option(*opt.decls, default=default,
                              show_default=not opt.kwargs.get("multiple"),
                              **opt.kwargs)(fn)
        fn = click.option("--config-dump", is_flag=True, default=False,
                          help="Print the resolved config as JSON and exit.")(fn)
        return fn
    return deco


def resolve_command(ctx: click.Context, command: str,
                    options: list[CliOption]) -> RunConfig:
    config_path = ctx.obj.get("config_path") if ctx.obj else None
    sections: dict[str, dict] = {}
    if config_path:
        sections = load_config_file(config_path, KNOWN_COMMANDS)
    flag_values = {}
    flag_given = {}
    for opt in options:
        flag_values[opt.spec.name] = ctx.params[opt.param]
        flag_given[opt.spec.name] = (
            ctx.get_parameter_source(opt.param) == ParameterSource.COMMANDLINE)
    return resolve(command, [o.spec for o in options], flag_values, flag_given,
                   sections.get(command), os.environ)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map domain failures onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(str(exc), EXIT_CONFIG)
        except CorpusFormatError as exc:
            _fail(str(exc), EXIT_IO)
        except CorpusError as exc:
            # Bad sizes or an unusable corpus, not a broken file.
            _fail(str(exc), EXIT_CONFIG)
        except CheckpointError as exc:
            _fail(str(exc), EXIT_IO)
        except FileNotFoundError as exc:
            _fail(f"{exc.filename or exc}: not found", EXIT_IO)
        except OSError as exc:
            _fail(str(exc), EXIT_IO)
        except ValueError as exc:
            # Invalid parameter combinations surface as config errors.
            _fail(str(exc), EXIT_CONFIG)
    return wrapper


def _maybe_dump(cfg: RunConfig, dump: bool) -> bool:
    if dump:
        click.echo(json.dumps(cfg.echo(), indent=2, sort_keys=True))
    return dump


@click.group(name="modlens")
@click.version_option(__version__, prog_name="modlens",
                      message="%(prog)s %(version)s")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; falls back to MODLENS_CONFIG.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Interpretable comment moderation: corpora, training, serving."""
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path or os.environ.get("MODLENS_CONFIG")


# -- synth ---------------------------------------------------------------

SYNTH_OPTIONS = [
    _opt("out", str, required=True, type=click.Path(), help="Corpus JSONL path."),
    _opt("comments", int, 2000, type=int, help="Total comments to generate."),
    _opt("benign-vocab", int, 200, type=int, help="Benign vocabulary size."),
    _opt("toxic", int, 10, type=int, help="Distinct planted toxic markers."),
    _opt("inappropriate-fraction", float, 0.5, type=float,
         help="Fraction of comments labeled inappropriate."),
    _opt("obfuscation-rate", float, 0.0, type=float,
         help="Chance a planted token is digit-obfuscated."),
    _opt("min-tokens", int, 6, type=int, help="Minimum comment length."),
    _opt("max-tokens", int, 18, type=int, help="Maximum comment length."),
    _opt("phrase-fraction", float, 0.3, type=float,
         help="Fraction of plants that are two-token phrases."),
    _opt("seed", int, 0, type=int, help="Generation seed."),
]


@main.command("synth")
@apply_options(SYNTH_OPTIONS)
@click.pass_context
@guarded
def synth(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Generate a labeled synthetic comment corpus."""
    from .text import SyntheticSpec, generate_synthetic_corpus, save_corpus

    cfg = resolve_command(ctx, "synth", SYNTH_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    spec = SyntheticSpec(
        comments=cfg["comments"],
        benign_vocab=cfg["benign-vocab"],
        toxic_count=cfg["toxic"],
        inappropriate_fraction=cfg["inappropriate-fraction"],
        obfuscation_rate=cfg["obfuscation-rate"],
        min_tokens=cfg["min-tokens"],
        max_tokens=cfg["max-tokens"],
        phrase_fraction=cfg["phrase-fraction"],
    )
    corpus = generate_synthetic_corpus(spec, seed=cfg["seed"])
    out = Path(cfg["out"])
    save_corpus(out, corpus)
    write_sidecar(out, cfg)
    click.echo(f"wrote {len(corpus)} comments to {out}")


# -- shared training options ----------------------------------------------

def _encoder_options(default_hidden: int) -> list[CliOption]:
    return [
        _opt("cell", str, "rcnn", type=click.Choice(["rcnn", "lstm"]),
             help="Recurrent cell kind."),
        _opt("hidden", int, default_hidden, type=int, help="Hidden state width."),
        _opt("layers", int, 2, type=int, help="Stacked recurrent layers."),
        _opt("order", int, 2, type=int, help="RCNN accumulator order."),
        _opt("dim", int, 100, type=int, help="Embedding dimension."),
        _opt("buckets", int, 16384, type=int, help="Hashed embedding buckets."),
        _opt("min-n", int, 3, type=int, help="Shortest character n-gram."),
        _opt("max-n", int, 5, type=int, help="Longest character n-gram."),
    ]


def _split_options() -> list[CliOption]:
    return [
        _opt("val-size", int, 500, type=int, help="Validation split size."),
        _opt("test-size", int, 500, type=int, help="Test split size."),
    ]


def _load_split(cfg: RunConfig):
    from .text import load_corpus, split_corpus

    corpus = load_corpus(cfg["corpus"])
    return split_corpus(corpus, cfg["val-size"], cfg["test-size"], cfg["seed"])


def _embedding(cfg: RunConfig):
    from .text import EmbeddingConfig

    return EmbeddingConfig(dim=cfg["dim"], min_n=cfg["min-n"],
                           max_n=cfg["max-n"], buckets=cfg["buckets"])


TRAIN_CLASSIFIER_OPTIONS = [
    _opt("corpus", str, required=True, type=click.Path(), help="Corpus JSONL."),
    _opt("out", str, required=True, type=click.Path(), help="Checkpoint path."),
    _opt("log", str, None, type=click.Path(),
         help="Training log path [default: <out>.log.jsonl]."),
    *_encoder_options(default_hidden=32),
    _opt("bidirectional", parse_bool, True,
         decls=("--bidirectional/--no-bidirectional",),
         help="Run the encoder in both directions."),
    _opt("pooling", str, "final", type=click.Choice(["final", "mean"]),
         help="How step states pool into one comment vector."),
    _opt("epochs", int, 8, type=int, help="Training epochs."),
    _opt("batch-size", int, 64, type=int, help="Balanced batch size."),
    _opt("lr", float, 1e-3, type=float, help="Adam learning rate."),
    _opt("clip-norm", float, 5.0, type=float, help="Global gradient norm cap."),
    _opt("ngram-dropout", float, 0.35, type=float,
         help="Training-only chance of zeroing each n-gram out of a token's "
              "mean embedding; hardens scoring against garbled spellings."),
    *_split_options(),
    _opt("seed", int, 0, type=int, help="Split and initialization seed."),
]


@main.command("train-classifier")
@apply_options(TRAIN_CLASSIFIER_OPTIONS)
@click.pass_context
@guarded
def train_classifier_cmd(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Train the recurrent binary classifier on a corpus."""
    from .models import ClassifierTrainConfig, EncoderConfig, train_classifier

    cfg = resolve_command(ctx, "train-classifier", TRAIN_CLASSIFIER_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    split = _load_split(cfg)
    encoder = EncoderConfig(
        cell=cfg["cell"], hidden=cfg["hidden"], layers=cfg["layers"],
        order=cfg["order"], bidirectional=cfg["bidirectional"],
        pooling=cfg["pooling"])
    train_cfg = ClassifierTrainConfig(
        encoder=encoder, embedding=_embedding(cfg), epochs=cfg["epochs"],
        batch_size=cfg["batch-size"], lr=cfg["lr"], clip_norm=cfg["clip-norm"],
        ngram_dropout=cfg["ngram-dropout"])
    model, run = train_classifier(split, train_cfg, seed=cfg["seed"])
    out = Path(cfg["out"])
    model.save(out, extra=cfg.echo())
    write_sidecar(out, cfg)
    log_path = Path(cfg["log"]) if cfg["log"] else Path(str(out) + ".log.jsonl")
    write_training_log(log_path, run)
    click.echo(f"status {run.status} best_val_loss {run.best_val_loss:.6f} "
               f"epochs {len(run.epochs)} checkpoint {out}")


TRAIN_RATIONALE_OPTIONS = [
    _opt("corpus", str, required=True, type=click.Path(), help="Corpus JSONL."),
    _opt("out", str, required=True, type=click.Path(), help="Checkpoint path."),
    _opt("log", str, None, type=click.Path(),
         help="Training log path [default: <out>.log.jsonl]."),
    _opt("lam1", float, 1e-3, type=float, help="Sparsity weight (per selected token)."),
    _opt("lam2", float, 2e-3, type=float, help="Coherence weight (per transition)."),
    _opt("samples", int, 4, type=int, help="Rationale samples per comment."),
    _opt("max-restarts", int, 4, type=int, help="Restarts allowed on degeneracy."),
    _opt("z-hidden", int, 30, type=int, help="Selection layer hidden width."),
    _opt("conditioned", parse_bool, True, decls=("--conditioned/--independent",),
         help="Condition each selection on the previous one."),
    _opt("degenerate-high", float, 0.95, type=float,
         help="Selected fraction treated as select-everything collapse."),
    _opt("degenerate-low", float, 0.005, type=float,
         help="Selected fraction treated as select-nothing collapse."),
    _opt("degenerate-patience", int, 3, type=int,
         help="Consecutive degenerate checks before a restart."),
    *_encoder_options(default_hidden=32),
    _opt("epochs", int, 10, type=int, help="Training epochs per attempt."),
    _opt("batch-size", int, 32, type=int, help="Balanced batch size."),
    _opt("lr", float, 1e-3, type=float, help="Adam learning rate."),
    _opt("clip-norm", float, 5.0, type=float, help="Global gradient norm cap."),
    *_split_options(),
    _opt("seed", int, 0, type=int, help="Split seed and first attempt seed."),
]


@main.command("train-rationale")
@apply_options(TRAIN_RATIONALE_OPTIONS)
@click.pass_context
@guarded
def train_rationale_cmd(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Jointly train the rationale generator and its classifier."""
    from .models import EncoderConfig
    from .rationale import JointConfig, train_joint

    cfg = resolve_command(ctx, "train-rationale", TRAIN_RATIONALE_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    split = _load_split(cfg)
    gen = EncoderConfig(cell=cfg["cell"], hidden=cfg["hidden"], layers=cfg["layers"],
                        order=cfg["order"], bidirectional=True)
    clas = EncoderConfig(cell=cfg["cell"], hidden=cfg["hidden"], layers=cfg["layers"],
                         order=cfg["order"], bidirectional=False)
    joint_cfg = JointConfig(
        lam1=cfg["lam1"], lam2=cfg["lam2"], samples=cfg["samples"],
        max_restarts=cfg["max-restarts"], degenerate_high=cfg["degenerate-high"],
        degenerate_low=cfg["degenerate-low"],
        degenerate_patience=cfg["degenerate-patience"], z_hidden=cfg["z-hidden"],
        conditioned=cfg["conditioned"], gen_encoder=gen, clas_encoder=clas,
        embedding=_embedding(cfg), epochs=cfg["epochs"],
        batch_size=cfg["batch-size"], lr=cfg["lr"], clip_norm=cfg["clip-norm"])
    model, run = train_joint(split, joint_cfg, [cfg["seed"]])
    out = Path(cfg["out"])
    log_path = Path(cfg["log"]) if cfg["log"] else Path(str(out) + ".log.jsonl")
    write_training_log(log_path, run)
    if run.status == FAILED_DEGENERATE:
        _fail(f"joint training degenerate after {run.restarts} restarts "
              f"(seeds {run.seeds_tried}); log at {log_path}", EXIT_TRAINING)
    model.save(out, extra=cfg.echo())
    write_sidecar(out, cfg)
    click.echo(f"status {run.status} restarts {run.restarts} seed {run.seed} "
               f"best_val_loss {run.best_val_loss:.6f} checkpoint {out}")


# -- evaluate --------------------------------------------------------------

EVALUATE_OPTIONS = [
    _opt("classifier", str, required=True, type=click.Path(),
         help="Classifier checkpoint."),
    _opt("joint", _paths, (), multiple=True,
         help="Joint checkpoint, repeatable; LABEL=PATH names the series."),
    _opt("corpus", str, required=True, type=click.Path(), help="Corpus JSONL."),
    _opt("out", str, required=True, type=click.Path(), help="Report directory."),
    _opt("saliency-fractions", parse_fractions, "0.05,0.1,0.15,0.2,0.3,0.5",
         help="Comma-separated saliency sweep fractions."),
    *_split_options(),
    _opt("seed", int, 0, type=int,
         help="Split seed; val+test of 0 evaluates the whole corpus."),
]


@main.command("evaluate")
@apply_options(EVALUATE_OPTIONS)
@click.pass_context
@guarded
def evaluate_cmd(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Score checkpoints on held-out data and write the report bundle."""
    from .evaluation import evaluate_model
    from .models import ClassifierModel
    from .rationale import JointModel
    from .text import load_corpus, split_corpus

    cfg = resolve_command(ctx, "evaluate", EVALUATE_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    classifier = ClassifierModel.load(cfg["classifier"])
    joints: dict[str, Any] = {}
    for item in cfg["joint"]:
        label, sep, path = item.partition("=")
        if not sep:
            label, path = Path(item).stem, item
        joints[label] = JointModel.load(path)
    corpus = load_corpus(cfg["corpus"])
    if cfg["val-size"] or cfg["test-size"]:
        test = split_corpus(corpus, cfg["val-size"], cfg["test-size"],
                            cfg["seed"]).test
    else:
        test = corpus
    out = Path(cfg["out"])
    report = evaluate_model(classifier, joints or None, test,
                            saliency_fractions=cfg["saliency-fractions"],
                            out_dir=out)
    out.joinpath("config.json").write_text(
        json.dumps(cfg.echo(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    summary = report["classification"]
    click.echo(f"accuracy {summary['accuracy']:.4f} auc {summary['auc']:.4f} "
               f"ap {summary['average_precision']:.4f} bundle {out}")


# -- highlight ---------------------------------------------------------------

HIGHLIGHT_OPTIONS = [
    _opt("classifier", str, required=True, type=click.Path(),
         help="Classifier checkpoint."),
    _opt("joint", str, required=True, type=click.Path(), help="Joint checkpoint."),
]


@main.command("highlight")
@apply_options(HIGHLIGHT_OPTIONS)
@click.pass_context
@guarded
def highlight_cmd(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Read comments from stdin, one per line; write span JSON lines."""
    from .service import InvalidComment, ModelScorer

    cfg = resolve_command(ctx, "highlight", HIGHLIGHT_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    scorer = ModelScorer.load(cfg["classifier"], cfg["joint"])
    for line in sys.stdin:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        try:
            scored = scorer.score(text)
        except InvalidComment as exc:
            click.echo(json.dumps({"text": text, "error": str(exc)},
                                  sort_keys=True))
            continue
        record = {
            "text": text,
            "probability": scored.probability,
            "spans": [[s.char_start, s.char_end] for s in scored.spans],
            "token_spans": [[s.token_start, s.token_end] for s in scored.spans],
        }
        click.echo(json.dumps(record, sort_keys=True))


# -- serve -------------------------------------------------------------------

SERVE_OPTIONS = [
    _opt("classifier", str, required=True, type=click.Path(),
         help="Classifier checkpoint."),
    _opt("joint", str, None, type=click.Path(),
         help="Joint checkpoint for highlights (optional)."),
    _opt("data-dir", str, required=True, type=click.Path(),
         help="Directory for the decision journal and snapshots."),
    _opt("host", str, "127.0.0.1", help="Listen address."),
    _opt("port", int, 8000, type=int, help="Listen port."),
    _opt("snapshot-every", int, 256, type=int,
         help="Journal events between snapshots."),
]


@main.command("serve")
@apply_options(SERVE_OPTIONS)
@click.pass_context
@guarded
def serve_cmd(ctx: click.Context, config_dump: bool, **_: Any) -> None:
    """Run the moderation queue HTTP service."""
    import uvicorn

    from .service import ModelScorer, ModerationStore, create_app

    cfg = resolve_command(ctx, "serve", SERVE_OPTIONS)
    if _maybe_dump(cfg, config_dump):
        return
    scorer = ModelScorer.load(cfg["classifier"], cfg["joint"])
    store = ModerationStore(cfg["data-dir"], snapshot_every=cfg["snapshot-every"])
    data_dir = Path(cfg["data-dir"])
    data_dir.joinpath("run_config.json").write_text(
        json.dumps(cfg.echo(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    app = create_app(store, scorer)
    click.echo(f"serving on http://{cfg['host']}:{cfg['port']} data {data_dir}")
    uvicorn.run(app, host=cfg["host"], port=cfg["port"], log_level="warning")


if __name__ == "__main__":
    main()
