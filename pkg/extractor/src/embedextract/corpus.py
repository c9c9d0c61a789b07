"""Minimal reader for the anime/character JSONL corpus.

The extractor consumes the same corpus files the regression pipeline
ingests, but needs only the text fields and portrait keys, so parsing
is deliberately lean: strict JSON per line, known kinds, unique IDs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import CorpusError


@dataclass(frozen=True)
class CharacterRecord:
    id: int
    name: str
    description: str
    portrait_ref: str


@dataclass(frozen=True)
class AnimeRecord:
    id: int
    title: str
    synopsis: str
    character_ids: tuple[int, ...]


@dataclass(frozen=True)
class ExtractionCorpus:
    animes: tuple[AnimeRecord, ...]
    characters: tuple[CharacterRecord, ...]

    def characters_of(self, anime: AnimeRecord) -> list[CharacterRecord]:
        """The anime's characters in ascending ID order."""
        by_id = {c.id: c for c in self.characters}
        try:
            return [by_id[cid] for cid in sorted(anime.character_ids)]
        except KeyError as exc:
            raise CorpusError(
                f"anime {anime.id} references unknown character {exc.args[0]}"
            ) from None


def read_corpus(path: str | Path) -> ExtractionCorpus:
    animes: dict[int, AnimeRecord] = {}
    characters: dict[int, CharacterRecord] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusError(f"cannot read corpus: {exc}") from exc

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(obj, dict):
            raise CorpusError(f"line {lineno}: expected an object")
        kind = obj.get("kind")
        try:
            if kind == "anime":
                rec = AnimeRecord(
                    id=int(obj["id"]),
                    title=str(obj.get("title", "")),
                    synopsis=str(obj.get("synopsis", "")),
                    character_ids=tuple(int(c) for c in obj["character_ids"]),
                )
                if rec.id in animes:
                    raise CorpusError(f"line {lineno}: duplicate anime id {rec.id}")
                animes[rec.id] = rec
            elif kind == "character":
                rec = CharacterRecord(
                    id=int(obj["id"]),
                    name=str(obj.get("name", "")),
                    description=str(obj.get("description", "")),
                    portrait_ref=str(obj.get("portrait_ref", "")),
                )
                if rec.id in characters:
                    raise CorpusError(f"line {lineno}: duplicate character id {rec.id}")
                characters[rec.id] = rec
            else:
                raise CorpusError(f"line {lineno}: unknown kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"line {lineno}: bad record ({exc})") from exc

    return ExtractionCorpus(
        animes=tuple(animes[k] for k in sorted(animes)),
        characters=tuple(characters[k] for k in sorted(characters)),
    )
