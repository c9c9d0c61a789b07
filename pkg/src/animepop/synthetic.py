"""Deterministic synthetic fixtures: corpora, embeddings, portraits.

Nothing here resembles real data; the generators exist so the pipeline
can be exercised end to end at any size without scraping anything.
Every function is a pure function of its seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import Anime, Character, Corpus, VoteAggregate, write_corpus
from .features import EmbeddingKind, EmbeddingRecord, write_embeddings, write_portraits

_WORDS = (
    "journey", "sword", "academy", "ghost", "piano", "island", "summer",
    "robot", "kitchen", "tournament", "dragon", "letter", "midnight",
    "garden", "captain", "shrine", "orbit", "bakery", "detective", "storm",
    "library", "festival", "mirror", "harbor", "violin", "shadow", "comet",
    "teacup", "lantern", "railway", "meadow", "puzzle", "anthem", "compass",
    "ember", "fountain", "glacier", "harvest", "ivory", "jungle", "keeper",
    "lagoon", "marble", "nebula", "oracle", "prism", "quarry", "ripple",
    "saffron", "tempest", "umbra", "vertex", "willow", "xylo", "yonder",
    "zephyr", "arcade", "bridge", "cinder", "drift",
)


def _sentence(rng: np.random.Generator, n_words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_words))


def synthetic_corpus(
    n_animes: int = 200,
    seed: int = 0,
    share_rate: float = 0.3,
    votes_rate: float = 0.8,
    max_characters: int = 4,
) -> Corpus:
    """A self-consistent random corpus that survives cleaning intact.

    Characters are reused across animes with probability share_rate per
    slot, which produces multi-anime clusters for the splitter. A
    votes_rate share of animes carries raw vote aggregates; the rest get
    an explicit golden score.
    """
    rng = np.random.default_rng(seed)
    characters: list[Character] = []
    animes: list[Anime] = []
    for anime_id in range(n_animes):
        n_chars = int(rng.integers(1, max_characters + 1))
        char_ids: set[int] = set()
        for _ in range(n_chars):
            if characters and rng.random() < share_rate:
                char_ids.add(int(rng.integers(0, len(characters))))
            else:
                cid = len(characters)
                characters.append(Character(
                    id=cid,
                    name=f"Figure {cid}",
                    description=_sentence(rng, int(rng.integers(8, 31))),
                    portrait_ref=f"p{cid}",
                ))
                char_ids.add(cid)

        votes = None
        golden = None
        if rng.random() < votes_rate:
            count = int(rng.integers(1, 20001))
            mean = float(rng.uniform(2.0, 9.5))
            votes = VoteAggregate(vote_count=count, vote_sum=min(round(mean * count, 1), 10.0 * count))
        else:
            golden = round(float(rng.uniform(2.0, 9.5)), 2)

        animes.append(Anime(
            id=anime_id,
            title=f"Show {anime_id}",
            synopsis=_sentence(rng, int(rng.integers(22, 61))),
            character_ids=tuple(sorted(char_ids)),
            votes=votes,
            golden_score=golden,
        ))
    corpus = Corpus(animes=tuple(animes), characters=tuple(characters))
    corpus.validate()
    return corpus


def synthetic_embeddings(corpus: Corpus, seed: int = 0) -> list[EmbeddingRecord]:
    """Standard-normal float32 vectors of the three conforming kinds,
    one triple per anime, in anime order."""
    rng = np.random.default_rng(seed)
    records: list[EmbeddingRecord] = []
    for anime in corpus.animes:
        for kind in (EmbeddingKind.SYNOPSIS, EmbeddingKind.CHAR_DESC, EmbeddingKind.PORTRAIT):
            dim = 768 if kind is not EmbeddingKind.PORTRAIT else 49
            vec = rng.standard_normal(dim).astype(np.float32)
            records.append(EmbeddingRecord(anime_id=anime.id, kind=kind, vector=vec))
    return records


def synthetic_portraits(
    corpus: Corpus, seed: int = 0, height: int = 16, width: int = 16
) -> dict[str, np.ndarray]:
    """Random RGB thumbnails keyed by every character's portrait_ref."""
    rng = np.random.default_rng(seed)
    return {
        c.portrait_ref: rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        for c in corpus.characters
    }


def write_fixture(
    out_dir: str | Path,
    n_animes: int = 200,
    seed: int = 0,
    with_portraits: bool = True,
) -> dict[str, Path]:
    """Write corpus/embeddings(/portraits) files; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = synthetic_corpus(n_animes=n_animes, seed=seed)
    paths = {
        "corpus": out / "corpus.jsonl",
        "embeddings": out / "embeddings.aem",
    }
    write_corpus(corpus, paths["corpus"])
    write_embeddings(synthetic_embeddings(corpus, seed=seed), paths["embeddings"])
    if with_portraits:
        paths["portraits"] = out / "portraits.apx"
        write_portraits(synthetic_portraits(corpus, seed=seed), paths["portraits"])
    return paths
