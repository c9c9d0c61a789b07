"""Corpus ingestion, cleaning, and descriptive statistics.

The corpus is a JSONL file of anime and character records.  Cleaning
removes records that would poison training: placeholder character
descriptions, animes without a usable synopsis or score, and so on.
Every removal carries a reason, so nothing disappears silently.
"""

import tempfile
from pathlib import Path

from animepop import (
    Anime,
    Character,
    Corpus,
    ScoreParams,
    clean,
    compute_stats,
    format_stats,
    parse_corpus,
    resolve_golden_scores,
    write_fixture,
)

with tempfile.TemporaryDirectory() as tmp:
    paths = write_fixture(Path(tmp), n_animes=120, seed=7)
    corpus = parse_corpus(paths["corpus"])
    print(f"parsed {len(corpus.animes)} animes, {len(corpus.characters)} characters")

    # Splice in the kinds of records real scrapes are full of.
    stub = Character(id=9000, name="Stub", description="No description available",
                     portrait_ref="p9000")
    teaser = Anime(id=9000, title="Teaser", synopsis="Too short to learn from.",
                   character_ids=(0,), golden_score=7.5)
    unscored = Anime(id=9001, title="Unscored", synopsis="x " * 30,
                     character_ids=(0,))
    corpus = Corpus(animes=corpus.animes + (teaser, unscored),
                    characters=corpus.characters + (stub,))

    # Some records carry raw vote aggregates instead of a golden score;
    # resolve them before cleaning so the "missing score" rule sees the
    # final labels.
    corpus = resolve_golden_scores(corpus, ScoreParams())

    cleaned, report = clean(corpus)
    print(f"kept {len(cleaned.animes)} of {len(corpus.animes)} animes after cleaning")
    for r in report.removed_characters:
        print(f"  removed character {r.id}: {r.reason}")
    for r in report.removed_animes:
        print(f"  removed anime {r.id}: {r.reason}")

    print()
    print(format_stats(compute_stats(cleaned)))
