"""Shared builders for small, valid corpora."""

from __future__ import annotations

import pytest

from animepop.corpus import Anime, Character, Corpus, VoteAggregate

LONG_SYNOPSIS = " ".join(f"word{i}" for i in range(25))


def make_character(cid: int, description: str | None = None, portrait_ref: str | None = None) -> Character:
    return Character(
        id=cid,
        name=f"Figure {cid}",
        description=description if description is not None else f"figure {cid} " * 6,
        portrait_ref=portrait_ref if portrait_ref is not None else f"p{cid}",
    )


def make_anime(
    aid: int,
    char_ids: tuple[int, ...],
    golden: float | None = 7.0,
    synopsis: str = LONG_SYNOPSIS,
    votes: VoteAggregate | None = None,
    title: str | None = None,
) -> Anime:
    return Anime(
        id=aid,
        title=title if title is not None else f"Show {aid}",
        synopsis=synopsis,
        character_ids=char_ids,
        votes=votes,
        golden_score=golden,
    )


@pytest.fixture
def tiny_corpus() -> Corpus:
    """Three animes over four characters; animes 0 and 1 share character 1."""
    characters = tuple(make_character(c) for c in range(4))
    animes = (
        make_anime(0, (0, 1), golden=7.5),
        make_anime(1, (1, 2), golden=4.2),
        make_anime(2, (3,), golden=8.8),
    )
    corpus = Corpus(animes=animes, characters=characters)
    corpus.validate()
    return corpus
