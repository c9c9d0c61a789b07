"""Dataset schema, ingestion, cleaning, and corpus statistics.

The on-disk corpus is a UTF-8 file of line-delimited JSON records. Each
line is one record, discriminated by a ``kind`` field:

    {"kind": "character", "id": ..., "name": ..., "description": ...,
     "portrait_ref": ...}
    {"kind": "anime", "id": ..., "title": ..., "synopsis": ...,
     "character_ids": [...], "vote_count": ..., "vote_sum": ...,
     "golden_score": ...}

``vote_count``/``vote_sum`` and ``golden_score`` are optional on anime
records; everything else is required. Unknown fields are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .errors import (
    DanglingReferenceError,
    DuplicateIdError,
    MalformedLineError,
)

DEFAULT_MIN_SYNOPSIS_WORDS = 20
DEFAULT_PLACEHOLDER_DESCRIPTIONS = ("No description available",)

NUM_SCORE_BUCKETS = 10


def wordcount(text: str) -> int:
    """Number of maximal whitespace-separated tokens."""
    return len(text.split())


@dataclass(frozen=True)
class Character:
    """One character, shared across animes by ID."""

    id: int
    name: str
    description: str
    portrait_ref: str

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"character id must be non-negative, got {self.id}")


@dataclass(frozen=True)
class VoteAggregate:
    """Raw vote statistics: voter count and the sum of all their scores."""

    vote_count: int
    vote_sum: float

    def __post_init__(self):
        if self.vote_count < 0:
            raise ValueError(f"vote_count must be non-negative, got {self.vote_count}")
        if self.vote_sum < 0:
            raise ValueError(f"vote_sum must be non-negative, got {self.vote_sum}")
        if self.vote_sum > 10 * self.vote_count:
            raise ValueError(
                f"vote_sum {self.vote_sum} exceeds 10 * vote_count ({self.vote_count})"
            )


@dataclass(frozen=True)
class Anime:
    """One corpus sample. ``golden_score`` may be given directly or left
    for resolution from ``votes`` (see scoring.resolve_golden_scores)."""

    id: int
    title: str
    synopsis: str
    character_ids: tuple[int, ...]
    votes: VoteAggregate | None = None
    golden_score: float | None = None

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"anime id must be non-negative, got {self.id}")
        if self.golden_score is not None and not 0.0 <= self.golden_score <= 10.0:
            raise ValueError(f"golden_score must lie in [0, 10], got {self.golden_score}")


@dataclass(frozen=True)
class Corpus:
    """Animes plus the characters they reference, with referential integrity."""

    animes: tuple[Anime, ...]
    characters: tuple[Character, ...]

    @cached_property
    def characters_by_id(self) -> dict[int, Character]:
        return {c.id: c for c in self.characters}

    @cached_property
    def animes_by_id(self) -> dict[int, Anime]:
        return {a.id: a for a in self.animes}

    def validate(self) -> None:
        """Raise if IDs collide or any character reference dangles."""
        seen_a: set[int] = set()
        for a in self.animes:
            if a.id in seen_a:
                raise DuplicateIdError(f"duplicate anime id {a.id}")
            seen_a.add(a.id)
        seen_c: set[int] = set()
        for c in self.characters:
            if c.id in seen_c:
                raise DuplicateIdError(f"duplicate character id {c.id}")
            seen_c.add(c.id)
        for a in self.animes:
            for cid in a.character_ids:
                if cid not in seen_c:
                    raise DanglingReferenceError(
                        f"anime {a.id} references undefined character id {cid}"
                    )


@dataclass(frozen=True)
class Removal:
    id: int
    reason: str


@dataclass(frozen=True)
class CleanReport:
    """Every removal performed by clean(), itemized with its reason."""

    removed_characters: tuple[Removal, ...]
    removed_animes: tuple[Removal, ...]

    @property
    def n_characters_removed(self) -> int:
        return len(self.removed_characters)

    @property
    def n_animes_removed(self) -> int:
        return len(self.removed_animes)


@dataclass(frozen=True)
class BucketStats:
    """Synopsis statistics for one [k, k+1) score bucket."""

    low: int
    count: int
    max_words: int
    min_words: int
    avg_words: float
    mean_characters: float


@dataclass(frozen=True)
class CharacterStats:
    total: int
    max_words: int
    min_words: int
    avg_words: float


@dataclass(frozen=True)
class StatsReport:
    buckets: tuple[BucketStats, ...]
    total_count: int
    total_max_words: int
    total_min_words: int
    total_avg_words: float
    characters: CharacterStats


# -- parsing -----------------------------------------------------------------

_CHARACTER_FIELDS = {"kind", "id", "name", "description", "portrait_ref"}
_ANIME_REQUIRED = {"kind", "id", "title", "synopsis", "character_ids"}
_ANIME_OPTIONAL = {"vote_count", "vote_sum", "golden_score"}


def _require_int(record: dict, key: str) -> int:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"field '{key}' must be an integer, got {value!r}")
    return value


def _require_str(record: dict, key: str) -> str:
    value = record[key]
    if not isinstance(value, str):
        raise ValueError(f"field '{key}' must be a string, got {value!r}")
    return value


def _require_number(record: dict, key: str) -> float:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"field '{key}' must be a number, got {value!r}")
    return float(value)


def _parse_character(record: dict) -> Character:
    extra = set(record) - _CHARACTER_FIELDS
    if extra:
        raise ValueError(f"unknown character fields: {sorted(extra)}")
    missing = _CHARACTER_FIELDS - set(record)
    if missing:
        raise ValueError(f"missing character fields: {sorted(missing)}")
    return Character(
        id=_require_int(record, "id"),
        name=_require_str(record, "name"),
        description=_require_str(record, "description"),
        portrait_ref=_require_str(record, "portrait_ref"),
    )


def _parse_anime(record: dict) -> Anime:
    extra = set(record) - _ANIME_REQUIRED - _ANIME_OPTIONAL
    if extra:
        raise ValueError(f"unknown anime fields: {sorted(extra)}")
    missing = _ANIME_REQUIRED - set(record)
    if missing:
        raise ValueError(f"missing anime fields: {sorted(missing)}")
    raw_ids = record["character_ids"]
    if not isinstance(raw_ids, list):
        raise ValueError("field 'character_ids' must be a list of integers")
    character_ids = []
    for cid in raw_ids:
        if isinstance(cid, bool) or not isinstance(cid, int):
            raise ValueError(f"character_ids entries must be integers, got {cid!r}")
        character_ids.append(cid)

    votes = None
    has_count = "vote_count" in record
    has_sum = "vote_sum" in record
    if has_count != has_sum:
        raise ValueError("vote_count and vote_sum must be supplied together")
    if has_count:
        votes = VoteAggregate(
            vote_count=_require_int(record, "vote_count"),
            vote_sum=_require_number(record, "vote_sum"),
        )
    golden = _require_number(record, "golden_score") if "golden_score" in record else None
    return Anime(
        id=_require_int(record, "id"),
        title=_require_str(record, "title"),
        synopsis=_require_str(record, "synopsis"),
        character_ids=tuple(character_ids),
        votes=votes,
        golden_score=golden,
    )


def parse_corpus(path: str | Path) -> Corpus:
    """Parse a line-delimited corpus file into a validated Corpus.

    Record order is preserved. Blank lines are skipped. Raises
    MalformedLineError (with the 1-based line number) on any schema
    violation, DuplicateIdError on colliding IDs, and
    DanglingReferenceError when an anime names an undefined character.
    """
    animes: list[Anime] = []
    characters: list[Character] = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_number, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise MalformedLineError(line_number, "record must be a JSON object")
            kind = record.get("kind")
            try:
                if kind == "character":
                    characters.append(_parse_character(record))
                elif kind == "anime":
                    animes.append(_parse_anime(record))
                else:
                    raise ValueError(f"unknown record kind {kind!r}")
            except ValueError as exc:
                raise MalformedLineError(line_number, str(exc)) from exc

    corpus = Corpus(animes=tuple(animes), characters=tuple(characters))
    corpus.validate()
    return corpus


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to its line-delimited format (characters first)."""
    with open(path, "w", encoding="utf-8") as fh:
        for c in corpus.characters:
            record = {
                "kind": "character",
                "id": c.id,
                "name": c.name,
                "description": c.description,
                "portrait_ref": c.portrait_ref,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        for a in corpus.animes:
            record = {
                "kind": "anime",
                "id": a.id,
                "title": a.title,
                "synopsis": a.synopsis,
                "character_ids": list(a.character_ids),
            }
            if a.votes is not None:
                record["vote_count"] = a.votes.vote_count
                record["vote_sum"] = a.votes.vote_sum
            if a.golden_score is not None:
                record["golden_score"] = a.golden_score
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


# -- cleaning ----------------------------------------------------------------

def clean(
    corpus: Corpus,
    min_synopsis_words: int = DEFAULT_MIN_SYNOPSIS_WORDS,
    placeholder_descriptions: Iterable[str] = DEFAULT_PLACEHOLDER_DESCRIPTIONS,
) -> tuple[Corpus, CleanReport]:
    """Remove unusable characters, then unusable animes.

    Characters go first: empty or placeholder descriptions (exact match)
    and missing portrait references disqualify a character. Animes are
    then dropped when they lack a golden score, synopsis, or title, when
    no referenced character survived, or when the synopsis is shorter
    than ``min_synopsis_words``. Surviving animes keep only surviving
    character references. Idempotent.
    """
    placeholders = frozenset(placeholder_descriptions)

    removed_characters: list[Removal] = []
    kept_characters: list[Character] = []
    for c in corpus.characters:
        if not c.description.strip():
            removed_characters.append(Removal(c.id, "empty description"))
        elif c.description in placeholders:
            removed_characters.append(Removal(c.id, "placeholder description"))
        elif not c.portrait_ref.strip():
            removed_characters.append(Removal(c.id, "missing portrait"))
        else:
            kept_characters.append(c)
    surviving_ids = {c.id for c in kept_characters}

    removed_animes: list[Removal] = []
    kept_animes: list[Anime] = []
    for a in corpus.animes:
        remaining = tuple(cid for cid in a.character_ids if cid in surviving_ids)
        if a.golden_score is None:
            removed_animes.append(Removal(a.id, "missing golden score"))
        elif not a.synopsis.strip():
            removed_animes.append(Removal(a.id, "missing synopsis"))
        elif not a.title.strip():
            removed_animes.append(Removal(a.id, "missing title"))
        elif not remaining:
            removed_animes.append(Removal(a.id, "no remaining characters"))
        elif wordcount(a.synopsis) < min_synopsis_words:
            removed_animes.append(Removal(a.id, "synopsis too short"))
        else:
            kept_animes.append(replace(a, character_ids=remaining))

    cleaned = Corpus(animes=tuple(kept_animes), characters=tuple(kept_characters))
    report = CleanReport(
        removed_characters=tuple(removed_characters),
        removed_animes=tuple(removed_animes),
    )
    return cleaned, report


# -- statistics ---------------------------------------------------------------

def score_bucket(score: float) -> int:
    """Half-open bucket index floor(score); 10.0 joins the 9-10 bucket."""
    return min(int(score), NUM_SCORE_BUCKETS - 1)


def compute_stats(corpus: Corpus) -> StatsReport:
    """Per-score-bucket synopsis wordcount statistics plus character totals.

    Buckets are [k, k+1) for k = 0..9 on the golden score. An empty
    corpus yields an all-zero report.
    """
    bucket_words: list[list[int]] = [[] for _ in range(NUM_SCORE_BUCKETS)]
    bucket_nchars: list[list[int]] = [[] for _ in range(NUM_SCORE_BUCKETS)]
    all_words: list[int] = []
    for a in corpus.animes:
        if a.golden_score is None:
            raise ValueError(f"anime {a.id} has no golden score; clean the corpus first")
        k = score_bucket(a.golden_score)
        n = wordcount(a.synopsis)
        bucket_words[k].append(n)
        bucket_nchars[k].append(len(a.character_ids))
        all_words.append(n)

    buckets = []
    for k in range(NUM_SCORE_BUCKETS):
        words = bucket_words[k]
        if words:
            buckets.append(BucketStats(
                low=k,
                count=len(words),
                max_words=max(words),
                min_words=min(words),
                avg_words=sum(words) / len(words),
                mean_characters=sum(bucket_nchars[k]) / len(words),
            ))
        else:
            buckets.append(BucketStats(k, 0, 0, 0, 0.0, 0.0))

    char_words = [wordcount(c.description) for c in corpus.characters]
    characters = CharacterStats(
        total=len(char_words),
        max_words=max(char_words) if char_words else 0,
        min_words=min(char_words) if char_words else 0,
        avg_words=sum(char_words) / len(char_words) if char_words else 0.0,
    )
    return StatsReport(
        buckets=tuple(buckets),
        total_count=len(all_words),
        total_max_words=max(all_words) if all_words else 0,
        total_min_words=min(all_words) if all_words else 0,
        total_avg_words=sum(all_words) / len(all_words) if all_words else 0.0,
        characters=characters,
    )


def format_stats(report: StatsReport) -> str:
    """Render a StatsReport as the fixed-column text table the CLI prints."""
    lines = []
    header = f"{'Score':<8}{'Samples':>9}{'Max. Words':>12}{'Min. Words':>12}{'Avg. Words':>12}{'Mean Chars':>12}"
    lines.append(header)
    lines.append("-" * len(header))
    for b in report.buckets:
        lines.append(
            f"{b.low}-{b.low + 1:<6}{b.count:>9}{b.max_words:>12}{b.min_words:>12}"
            f"{b.avg_words:>12.2f}{b.mean_characters:>12.2f}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'Total':<8}{report.total_count:>9}{report.total_max_words:>12}"
        f"{report.total_min_words:>12}{report.total_avg_words:>12.2f}{'':>12}"
    )
    c = report.characters
    lines.append("")
    lines.append(
        f"Characters: total={c.total} max_words={c.max_words} "
        f"min_words={c.min_words} avg_words={c.avg_words:.2f}"
    )
    return "\n".join(lines)
