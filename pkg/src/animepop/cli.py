"""Command-line entry point wiring the library into reproducible runs.

Subcommands: ingest, stats, split, train, evaluate, validate-embeddings.
Every subcommand accepts --config (key=value file), --seed, and
--out-dir; explicit flags beat config-file values, which beat defaults.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import pipeline, splitter
from .errors import DataError, NumericError
from .features import EmbeddingKind, index_embeddings, read_embeddings, read_portraits
from .pipeline import ModelVariant, TrainConfig
from .scoring import ScoreParams, resolve_golden_scores

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


# Config-file keys and the types their values are parsed with.
_CONFIG_KEYS = {
    "seed": int,
    "out_dir": str,
    "min_synopsis_words": int,
    "fraction": float,
    "batch_size": int,
    "epochs": int,
    "learning_rate": float,
    "beta1": float,
    "beta2": float,
    "eps": float,
    "weight_decay": float,
}


def read_config_file(path: str | Path) -> dict[str, object]:
    """Parse a key=value file; blank lines and #-comments are skipped."""
    values: dict[str, object] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {line_number}: expected key=value, got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _CONFIG_KEYS:
            raise UsageError(f"config line {line_number}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](raw)
        except ValueError as exc:
            raise UsageError(f"config line {line_number}: bad value for {key}: {raw!r}") from exc
    return values


class Settings:
    """Flag > config file > default resolution for one invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_values = read_config_file(args.config) if args.config else {}

    def get(self, key: str, default):
        flag_value = getattr(self.args, key, None)
        if flag_value is not None:
            return flag_value
        if key in self.file_values:
            return self.file_values[key]
        return default

    @property
    def seed(self) -> int:
        return int(self.get("seed", 42))

    @property
    def out_dir(self) -> Path:
        return Path(self.get("out_dir", "."))

    @property
    def min_synopsis_words(self) -> int:
        return int(self.get("min_synopsis_words", corpus_mod.DEFAULT_MIN_SYNOPSIS_WORDS))


def load_clean_corpus(path: str, min_synopsis_words: int) -> tuple:
    """parse -> resolve golden scores -> clean; the shared ingestion path."""
    raw = corpus_mod.parse_corpus(path)
    resolved = resolve_golden_scores(raw, ScoreParams())
    return corpus_mod.clean(resolved, min_synopsis_words=min_synopsis_words)


# -- subcommands ---------------------------------------------------------------

def cmd_ingest(settings: Settings) -> int:
    cleaned, report = load_clean_corpus(settings.args.corpus, settings.min_synopsis_words)
    out_path = Path(settings.args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_corpus(cleaned, out_path)

    reasons: dict[str, int] = {}
    for removal in report.removed_characters + report.removed_animes:
        reasons[removal.reason] = reasons.get(removal.reason, 0) + 1
    print(f"kept {len(cleaned.animes)} animes, {len(cleaned.characters)} characters")
    print(f"removed {report.n_animes_removed} animes, {report.n_characters_removed} characters")
    for reason in sorted(reasons):
        print(f"  {reason}: {reasons[reason]}")
    print(f"wrote {out_path}")
    return EXIT_OK


def cmd_stats(settings: Settings) -> int:
    cleaned, _ = load_clean_corpus(settings.args.corpus, settings.min_synopsis_words)
    print(corpus_mod.format_stats(corpus_mod.compute_stats(cleaned)))
    return EXIT_OK


def cmd_split(settings: Settings) -> int:
    fraction = float(settings.get("fraction", splitter.DEFAULT_TRAIN_FRACTION))
    if not 0.0 < fraction < 1.0:
        raise UsageError(f"--fraction must lie strictly between 0 and 1, got {fraction}")
    cleaned, _ = load_clean_corpus(settings.args.corpus, settings.min_synopsis_words)
    assignment = splitter.build_clusters(cleaned)
    result = splitter.split(assignment, target_train_fraction=fraction, seed=settings.seed)

    out_path = Path(settings.args.out) if settings.args.out else settings.out_dir / "split.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    splitter.write_split_manifest(result, assignment, out_path)
    leaked = splitter.verify_no_leakage(result, cleaned)
    print(f"clusters: {assignment.cluster_count}")
    print(f"train: {len(result.train)}  test: {len(result.test)}  "
          f"achieved fraction: {result.achieved_train_fraction:.6f}")
    print(f"shared characters across sides: {len(leaked)}")
    print(f"wrote {out_path}")
    return EXIT_OK


def _parse_variant(name: str) -> ModelVariant:
    try:
        return ModelVariant(name)
    except ValueError:
        valid = ", ".join(v.value for v in ModelVariant)
        raise UsageError(f"unknown variant {name!r}; expected one of: {valid}") from None


def _load_run_inputs(settings: Settings, variant: ModelVariant):
    """Corpus, split, and per-variant features shared by train/evaluate."""
    args = settings.args
    cleaned, _ = load_clean_corpus(args.corpus, settings.min_synopsis_words)
    split_, _ = splitter.read_split_manifest(args.split)

    known = set(cleaned.animes_by_id)
    missing = sorted((split_.train | split_.test) - known)
    if missing:
        raise DataError(
            f"split manifest names {len(missing)} animes absent from the corpus "
            f"(first: {missing[0]})"
        )

    if variant is ModelVariant.TRADITIONAL:
        portraits = read_portraits(args.portraits) if args.portraits else None
        features, _, _ = pipeline.traditional_features(cleaned, split_.train, portraits)
    else:
        if not args.embeddings:
            raise UsageError(f"variant {variant.value} requires --embeddings")
        store = index_embeddings(read_embeddings(args.embeddings))
        features = pipeline.deep_features(cleaned, store, variant)
    return cleaned, split_, features


def cmd_train(settings: Settings) -> int:
    args = settings.args
    variant = _parse_variant(args.variant)
    config = TrainConfig(
        seed=settings.seed,
        batch_size=int(settings.get("batch_size", 16)),
        epochs=int(settings.get("epochs", pipeline.default_epochs(variant))),
        learning_rate=float(settings.get("learning_rate", 5e-2)),
        beta1=float(settings.get("beta1", 0.9)),
        beta2=float(settings.get("beta2", 0.999)),
        eps=float(settings.get("eps", 1e-8)),
        weight_decay=float(settings.get("weight_decay", 0.01)),
    )
    if config.epochs < 1:
        raise UsageError(f"epochs must be >= 1, got {config.epochs}")

    cleaned, split_, features = _load_run_inputs(settings, variant)
    scale_params, scaled, raw = pipeline.scale_labels(cleaned, split_)

    model = pipeline.build_model(variant, seed=settings.seed)
    model, curve = pipeline.train(model, split_, features, scaled, config)

    report = None
    if split_.test:
        report = pipeline.evaluate(model, split_.test, features, raw, scale_params)

    out_dir = settings.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / f"{variant.value}.ckpt"
    curve_path = out_dir / f"{variant.value}_curve.csv"
    manifest_path = out_dir / f"{variant.value}_manifest.txt"
    pipeline.save_checkpoint(model, ckpt_path)
    pipeline.write_learning_curve(curve, curve_path)
    pipeline.write_run_manifest(
        manifest_path,
        variant=variant,
        seed=settings.seed,
        config=config,
        scale_params=scale_params,
        train_fraction=split_.achieved_train_fraction,
        n_train=len(split_.train),
        n_test=len(split_.test),
        report=report,
    )

    print(f"note: {pipeline.FINAL_ACTIVATION_NOTE}")
    for epoch, (t, v) in enumerate(zip(curve.train_loss, curve.test_loss), start=1):
        print(f"epoch {epoch}: train_loss={t:.6e} test_loss={v:.6e}")
    if report is not None:
        print(pipeline.format_eval_report(report))
    print(f"wrote {ckpt_path}")
    print(f"wrote {curve_path}")
    print(f"wrote {manifest_path}")
    return EXIT_OK


def cmd_evaluate(settings: Settings) -> int:
    args = settings.args
    model = pipeline.load_checkpoint(args.checkpoint)
    variant = model.variant
    cleaned, split_, features = _load_run_inputs(settings, variant)
    scale_params, _, raw = pipeline.scale_labels(cleaned, split_)
    report = pipeline.evaluate(model, split_.test, features, raw, scale_params)

    text = pipeline.format_eval_report(report)
    print(f"variant: {variant.value}")
    print(text)
    out_dir = settings.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"{variant.value}_eval.txt"
    report_path.write_text(f"variant: {variant.value}\n{text}\n", encoding="utf-8")
    print(f"wrote {report_path}")
    return EXIT_OK


def cmd_validate_embeddings(settings: Settings) -> int:
    records = read_embeddings(settings.args.path)
    index_embeddings(records)  # rejects duplicate (anime, kind) pairs
    counts = {kind: 0 for kind in EmbeddingKind}
    animes: dict[int, set[EmbeddingKind]] = {}
    for r in records:
        counts[r.kind] += 1
        animes.setdefault(r.anime_id, set()).add(r.kind)
    complete = sum(1 for kinds in animes.values() if len(kinds) == 3)
    print(f"records: {len(records)}")
    for kind in EmbeddingKind:
        print(f"  {kind.name.lower()}: {counts[kind]}")
    print(f"animes: {len(animes)} ({complete} with all three kinds)")
    print("format: ok")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--seed", type=int, help="random seed (default 42)")
    common.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")

    parser = argparse.ArgumentParser(
        prog="animepop",
        description="Anime popularity regression: data prep, splitting, training, evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="clean a corpus file")
    p.add_argument("--corpus", required=True, help="line-delimited corpus file")
    p.add_argument("--out", required=True, help="path for the cleaned corpus")
    p.add_argument("--min-synopsis-words", dest="min_synopsis_words", type=int)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", parents=[common], help="print corpus statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--min-synopsis-words", dest="min_synopsis_words", type=int)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", parents=[common], help="leakage-free train/test split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--fraction", type=float, help="target train fraction (default 0.815)")
    p.add_argument("--out", help="manifest path (default <out-dir>/split.json)")
    p.add_argument("--min-synopsis-words", dest="min_synopsis_words", type=int)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", parents=[common], help="train one model variant")
    p.add_argument("variant", help="full | synopsis-only | char-desc-only | portrait-only | traditional")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True, help="split manifest from the split command")
    p.add_argument("--embeddings", help="embedding file (deep variants)")
    p.add_argument("--portraits", help="portrait container (traditional variant)")
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--min-synopsis-words", dest="min_synopsis_words", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--embeddings")
    p.add_argument("--portraits")
    p.add_argument("--min-synopsis-words", dest="min_synopsis_words", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("validate-embeddings", parents=[common], help="check an embedding file")
    p.add_argument("path", help="embedding file to validate")
    p.set_defaults(func=cmd_validate_embeddings)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = Settings(args)
        return args.func(settings)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
