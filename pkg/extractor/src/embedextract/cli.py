"""Command-line extraction: corpus + images in, embedding file out."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import torch

from .config import POOLING_STRATEGIES, ExtractionConfig
from .corpus import read_corpus
from .errors import ExtractionError, UnreadableImageError
from .extract import (
    extract_char_desc,
    extract_portraits,
    extract_synopsis,
    load_portrait,
)
from .models import load_text_model, load_vision_trunk
from .store import KIND_CHAR_DESC, KIND_PORTRAIT, KIND_SYNOPSIS, write_store

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def resolve_portrait_path(images_dir: Path, portrait_ref: str) -> Path:
    """portrait_ref names a file in the images directory, with or
    without an extension."""
    direct = images_dir / portrait_ref
    if direct.is_file():
        return direct
    for candidate in sorted(images_dir.glob(f"{portrait_ref}.*")):
        if candidate.is_file():
            return candidate
    raise UnreadableImageError(
        f"no image for portrait_ref {portrait_ref!r} in {images_dir}"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-extract",
        description="extract synopsis/character/portrait embeddings "
        "into the pipeline's binary container",
    )
    parser.add_argument("--corpus", required=True, help="corpus JSONL file")
    parser.add_argument("--images", required=True,
                        help="directory of portrait images keyed by portrait_ref")
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--text-model", default=None,
                        help="hub name or local directory (default gpt2)")
    parser.add_argument("--vision-model", default=None,
                        help="resnet50 or resnet50-untrained (default resnet50)")
    parser.add_argument("--pooling", default=None, choices=POOLING_STRATEGIES,
                        help="text pooling strategy (default mean)")
    return parser


def run(args: argparse.Namespace) -> int:
    overrides = {}
    if args.text_model is not None:
        overrides["text_model"] = args.text_model
    if args.vision_model is not None:
        overrides["vision_model"] = args.vision_model
    if args.pooling is not None:
        overrides["pooling"] = args.pooling
    config = ExtractionConfig(**overrides)

    # Fixed thread count keeps reductions, and therefore output bytes,
    # identical between runs on the same machine.
    torch.set_num_threads(1)

    corpus = read_corpus(args.corpus)
    images_dir = Path(args.images)
    if not images_dir.is_dir():
        raise UnreadableImageError(f"images directory not found: {images_dir}")

    text = load_text_model(config)
    trunk = load_vision_trunk(config)

    entries = []
    for anime in corpus.animes:
        characters = corpus.characters_of(anime)
        portraits = [
            load_portrait(resolve_portrait_path(images_dir, c.portrait_ref))
            for c in characters
            if c.portrait_ref
        ]
        entries.append((anime.id, KIND_SYNOPSIS,
                        extract_synopsis(anime, text, config)))
        entries.append((anime.id, KIND_CHAR_DESC,
                        extract_char_desc(anime, characters, text, config)))
        entries.append((anime.id, KIND_PORTRAIT,
                        extract_portraits(anime, portraits, trunk, config)))
        print(f"anime {anime.id}: embedded synopsis, "
              f"{len(characters)} character descriptions, "
              f"{len(portraits)} portraits")

    write_store(entries, args.out)
    print(f"wrote {len(entries)} records to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except ExtractionError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"OSError: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
