"""Embedding extraction for the anime popularity pipeline.

Turns a corpus of synopses, character descriptions, and portrait
images into the binary embedding container the regression pipeline
consumes (768/768/49-wide vectors per anime).
"""

from .config import (
    CHAR_DESC_DIM,
    PORTRAIT_DIM,
    POOLING_STRATEGIES,
    SYNOPSIS_DIM,
    ExtractionConfig,
)
from .corpus import AnimeRecord, CharacterRecord, ExtractionCorpus, read_corpus
from .errors import (
    CorpusError,
    EmptyTextError,
    ExtractionError,
    ModelLoadError,
    StoreError,
    UnreadableImageError,
)
from .extract import (
    compose_portraits,
    extract_char_desc,
    extract_portraits,
    extract_synopsis,
    load_portrait,
)
from .models import TextBundle, load_text_model, load_vision_trunk
from .store import (
    KIND_CHAR_DESC,
    KIND_DIMS,
    KIND_PORTRAIT,
    KIND_SYNOPSIS,
    write_store,
)

__version__ = "0.1.0"

__all__ = [
    "AnimeRecord", "CharacterRecord", "ExtractionConfig", "ExtractionCorpus",
    "CHAR_DESC_DIM", "PORTRAIT_DIM", "POOLING_STRATEGIES", "SYNOPSIS_DIM",
    "CorpusError", "EmptyTextError", "ExtractionError", "ModelLoadError",
    "StoreError", "UnreadableImageError",
    "TextBundle", "compose_portraits", "extract_char_desc",
    "extract_portraits", "extract_synopsis", "load_portrait",
    "load_text_model", "load_vision_trunk", "read_corpus",
    "KIND_CHAR_DESC", "KIND_DIMS", "KIND_PORTRAIT", "KIND_SYNOPSIS",
    "write_store",
]
