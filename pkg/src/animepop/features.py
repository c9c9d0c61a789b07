"""Model inputs: embedding file I/O, TF-IDF, pixel vectors, and assembly.

Embedding container (little-endian): magic "AEM1", version u32 = 1,
record count u64, then per record anime_id u64, kind u8 (0=synopsis,
1=char_desc, 2=portrait), dimension u32, and that many IEEE-754 32-bit
floats. Any deviation is a hard parse error. Round trips are bit-exact.

Portrait thumbnails travel in a sibling container (magic "APX1") keyed
by the corpus's opaque portrait_ref strings.
"""

from __future__ import annotations

import re
import struct
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from math import log
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Anime, Character
from .errors import (
    BadMagicError,
    DimensionMismatchError,
    DuplicateIdError,
    EmbeddingFormatError,
    EmptyVocabularyError,
    MissingEmbeddingError,
    NonFiniteVectorError,
    TruncatedFileError,
    VersionMismatchError,
)

EMBEDDING_MAGIC = b"AEM1"
EMBEDDING_VERSION = 1
PORTRAIT_MAGIC = b"APX1"
PORTRAIT_VERSION = 1

TFIDF_MAX_FEATURES = 750
TRAD_SEGMENT = 750
TRAD_DIM = 3 * TRAD_SEGMENT


class EmbeddingKind(IntEnum):
    SYNOPSIS = 0
    CHAR_DESC = 1
    PORTRAIT = 2


EMBEDDING_DIMS = {
    EmbeddingKind.SYNOPSIS: 768,
    EmbeddingKind.CHAR_DESC: 768,
    EmbeddingKind.PORTRAIT: 49,
}


@dataclass(frozen=True)
class EmbeddingRecord:
    """One fixed-dimension float32 vector for an (anime, input kind) pair."""

    anime_id: int
    kind: EmbeddingKind
    vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float32)
        object.__setattr__(self, "vector", vec)
        expected = EMBEDDING_DIMS[self.kind]
        if vec.ndim != 1 or vec.shape[0] != expected:
            raise DimensionMismatchError(
                f"kind {self.kind.name.lower()} expects dimension {expected}, "
                f"got shape {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise NonFiniteVectorError(
                f"embedding for anime {self.anime_id} kind {self.kind.name.lower()} "
                "contains non-finite entries"
            )


def write_embeddings(records: Sequence[EmbeddingRecord], path: str | Path) -> None:
    """Write records in order; read_embeddings inverts this bit-exactly."""
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<IQ", EMBEDDING_VERSION, len(records)))
        for r in records:
            fh.write(struct.pack("<QBI", r.anime_id, int(r.kind), r.vector.shape[0]))
            fh.write(r.vector.astype("<f4", copy=False).tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedFileError(f"file ended while reading {what} ({len(data)}/{n} bytes)")
    return data


def read_embeddings(path: str | Path) -> list[EmbeddingRecord]:
    """Read an embedding container, validating layout and per-kind dimensions."""
    records: list[EmbeddingRecord] = []
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != EMBEDDING_MAGIC:
            raise BadMagicError(f"expected magic {EMBEDDING_MAGIC!r}, got {magic!r}")
        version, count = struct.unpack("<IQ", _read_exact(fh, 12, "header"))
        if version != EMBEDDING_VERSION:
            raise VersionMismatchError(
                f"unsupported embedding format version {version}, expected {EMBEDDING_VERSION}"
            )
        for i in range(count):
            anime_id, kind_byte, dim = struct.unpack(
                "<QBI", _read_exact(fh, 13, f"record {i} header")
            )
            try:
                kind = EmbeddingKind(kind_byte)
            except ValueError:
                raise EmbeddingFormatError(
                    f"record {i}: unknown embedding kind byte {kind_byte}"
                ) from None
            expected = EMBEDDING_DIMS[kind]
            if dim != expected:
                raise DimensionMismatchError(
                    f"record {i}: kind {kind.name.lower()} expects dimension "
                    f"{expected}, got {dim}"
                )
            raw = _read_exact(fh, 4 * dim, f"record {i} vector")
            vector = np.frombuffer(raw, dtype="<f4").copy()
            if not np.all(np.isfinite(vector)):
                raise NonFiniteVectorError(
                    f"record {i}: vector for anime {anime_id} contains non-finite entries"
                )
            records.append(EmbeddingRecord(anime_id=anime_id, kind=kind, vector=vector))
        trailing = fh.read(1)
        if trailing:
            raise EmbeddingFormatError("trailing bytes after the declared records")
    return records


def index_embeddings(
    records: Iterable[EmbeddingRecord],
) -> dict[tuple[int, EmbeddingKind], np.ndarray]:
    """Key records by (anime_id, kind); duplicates are a data error."""
    store: dict[tuple[int, EmbeddingKind], np.ndarray] = {}
    for r in records:
        key = (r.anime_id, r.kind)
        if key in store:
            raise DuplicateIdError(
                f"duplicate embedding record for anime {r.anime_id} "
                f"kind {r.kind.name.lower()}"
            )
        store[key] = r.vector
    return store


# -- portrait thumbnails -------------------------------------------------------

def write_portraits(images: Mapping[str, np.ndarray], path: str | Path) -> None:
    """Write portrait pixel grids keyed by portrait_ref, sorted by key."""
    with open(path, "wb") as fh:
        fh.write(PORTRAIT_MAGIC)
        fh.write(struct.pack("<IQ", PORTRAIT_VERSION, len(images)))
        for key in sorted(images):
            pixels = np.ascontiguousarray(images[key], dtype=np.uint8)
            if pixels.ndim != 3:
                raise ValueError(f"portrait {key!r} must be a (H, W, C) byte grid")
            encoded = key.encode("utf-8")
            h, w, c = pixels.shape
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<HHB", h, w, c))
            fh.write(pixels.tobytes())


def read_portraits(path: str | Path) -> dict[str, np.ndarray]:
    """Read a portrait container back into a key -> (H, W, C) uint8 map."""
    images: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != PORTRAIT_MAGIC:
            raise BadMagicError(f"expected magic {PORTRAIT_MAGIC!r}, got {magic!r}")
        version, count = struct.unpack("<IQ", _read_exact(fh, 12, "header"))
        if version != PORTRAIT_VERSION:
            raise VersionMismatchError(
                f"unsupported portrait format version {version}, expected {PORTRAIT_VERSION}"
            )
        for i in range(count):
            (key_len,) = struct.unpack("<H", _read_exact(fh, 2, f"record {i} key length"))
            key = _read_exact(fh, key_len, f"record {i} key").decode("utf-8")
            h, w, c = struct.unpack("<HHB", _read_exact(fh, 5, f"record {i} shape"))
            raw = _read_exact(fh, h * w * c, f"record {i} pixels")
            images[key] = np.frombuffer(raw, dtype=np.uint8).reshape(h, w, c).copy()
        if fh.read(1):
            raise EmbeddingFormatError("trailing bytes after the declared records")
    return images


# -- TF-IDF --------------------------------------------------------------------

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    """Fitted TF-IDF vocabulary: terms, document frequencies, idf weights.

    ``dim`` is the requested max_features; transform vectors are padded
    with zeros when fewer terms were available.
    """

    terms: tuple[str, ...]
    doc_freq: tuple[int, ...]
    idf: np.ndarray
    n_docs: int
    dim: int

    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


def tfidf_fit(documents: Sequence[str], max_features: int = TFIDF_MAX_FEATURES) -> Vocabulary:
    """Fit a vocabulary of the max_features highest-document-frequency terms.

    Ties break lexicographically. idf(t) = ln((1 + N) / (1 + df(t))) + 1.
    Raises EmptyVocabularyError when no document yields a single token.
    """
    if max_features < 1:
        raise ValueError(f"max_features must be >= 1, got {max_features}")
    df: Counter[str] = Counter()
    for doc in documents:
        df.update(set(tokenize(doc)))
    if not df:
        raise EmptyVocabularyError("no tokens found in any document")
    ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))[:max_features]
    terms = tuple(t for t, _ in ranked)
    freqs = tuple(f for _, f in ranked)
    n = len(documents)
    idf = np.array([log((1 + n) / (1 + f)) + 1.0 for f in freqs], dtype=np.float64)
    return Vocabulary(terms=terms, doc_freq=freqs, idf=idf, n_docs=n, dim=max_features)


def tfidf_transform(document: str, vocab: Vocabulary) -> np.ndarray:
    """Counts times idf per vocabulary term, L2-normalized (zero stays zero)."""
    vec = np.zeros(vocab.dim, dtype=np.float64)
    index = vocab.term_index()
    counts = Counter(tokenize(document))
    for term, count in counts.items():
        j = index.get(term)
        if j is not None:
            vec[j] = count * vocab.idf[j]
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


# -- pixel vectors ---------------------------------------------------------------

def image_to_vector(pixels: np.ndarray, length: int = TRAD_SEGMENT) -> np.ndarray:
    """Scale bytes to [0, 1], flatten channel-major then row-major, and
    truncate to ``length`` (or zero-pad when shorter)."""
    grid = np.asarray(pixels)
    if grid.ndim != 3 or grid.size < 1:
        raise ValueError(f"pixels must be a non-empty (H, W, C) grid, got shape {grid.shape}")
    flat = np.transpose(grid, (2, 0, 1)).astype(np.float64).ravel() / 255.0
    out = np.zeros(length, dtype=np.float64)
    n = min(length, flat.shape[0])
    out[:n] = flat[:n]
    return out


# -- assembly ----------------------------------------------------------------------

def concat_character_descriptions(anime: Anime, characters: Mapping[int, Character]) -> str:
    """Descriptions of the anime's characters, ascending ID, newline-joined."""
    return "\n".join(characters[cid].description for cid in sorted(anime.character_ids))


def compose_portraits(
    anime: Anime,
    characters: Mapping[int, Character],
    portraits: Mapping[str, np.ndarray],
) -> np.ndarray | None:
    """One pixel grid per anime: portraits side by side, ascending character ID.

    Grids are cropped to the shortest height present. Returns None when no
    referenced character has a stored portrait; the pixel segment is then
    all zeros downstream.
    """
    grids = []
    for cid in sorted(anime.character_ids):
        ref = characters[cid].portrait_ref
        grid = portraits.get(ref)
        if grid is not None:
            grids.append(grid)
    if not grids:
        return None
    channels = {g.shape[2] for g in grids}
    if len(channels) != 1:
        raise ValueError(
            f"portraits for anime {anime.id} disagree on channel count: {sorted(channels)}"
        )
    height = min(g.shape[0] for g in grids)
    return np.concatenate([g[:height] for g in grids], axis=1)


def assemble_trad_input(
    anime: Anime,
    characters: Mapping[int, Character],
    vocab_syn: Vocabulary,
    vocab_char: Vocabulary,
    portrait_pixels: np.ndarray | None,
) -> np.ndarray:
    """Synopsis TF-IDF (+) character-description TF-IDF (+) pixel vector.

    Each segment has TRAD_SEGMENT entries; a missing portrait yields a
    zero pixel segment.
    """
    if vocab_syn.dim != TRAD_SEGMENT or vocab_char.dim != TRAD_SEGMENT:
        raise ValueError(
            f"traditional vocabularies must have dim {TRAD_SEGMENT}, "
            f"got ({vocab_syn.dim}, {vocab_char.dim})"
        )
    syn = tfidf_transform(anime.synopsis, vocab_syn)
    char_doc = concat_character_descriptions(anime, characters)
    char = tfidf_transform(char_doc, vocab_char)
    if portrait_pixels is None:
        px = np.zeros(TRAD_SEGMENT, dtype=np.float64)
    else:
        px = image_to_vector(portrait_pixels, TRAD_SEGMENT)
    return np.concatenate([syn, char, px])


def assemble_deep_input(
    anime: Anime,
    store: Mapping[tuple[int, EmbeddingKind], np.ndarray],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The (synopsis, char_desc, portrait) vectors for one anime.

    Raises MissingEmbeddingError naming the anime and kind when the
    store lacks one of the three.
    """
    out = []
    for kind in (EmbeddingKind.SYNOPSIS, EmbeddingKind.CHAR_DESC, EmbeddingKind.PORTRAIT):
        vec = store.get((anime.id, kind))
        if vec is None:
            raise MissingEmbeddingError(
                f"no {kind.name.lower()} embedding for anime {anime.id}"
            )
        out.append(vec)
    return out[0], out[1], out[2]
