"""The three extraction operations: synopsis, character descriptions,
and concatenated portraits.

All extraction runs in eval mode under no_grad, so a fixed model and
config always produce identical vectors.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .config import CHAR_DESC_DIM, ExtractionConfig, PORTRAIT_DIM, SYNOPSIS_DIM
from .corpus import AnimeRecord, CharacterRecord
from .errors import EmptyTextError, UnreadableImageError
from .models import TextBundle

# Canonical preprocessing for the vision trunk: the 50-layer residual
# network emits a 7x7 map only for 224x224 inputs.
_IMAGE_SIDE = 224
_IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


def _pool(hidden: torch.Tensor, strategy: str) -> torch.Tensor:
    # hidden: (tokens, width)
    if strategy == "mean":
        return hidden.mean(dim=0)
    if strategy == "last":
        return hidden[-1]
    if strategy == "max":
        return hidden.max(dim=0).values
    raise ValueError(f"unknown pooling {strategy!r}")


def _embed_text(text: str, bundle: TextBundle, limit: int, pooling: str) -> np.ndarray:
    if not text.strip():
        raise EmptyTextError("text is empty")
    encoded = bundle.tokenizer(
        text, return_tensors="pt", truncation=True, max_length=limit
    )
    with torch.no_grad():
        hidden = bundle.model(**encoded).last_hidden_state[0]
    vector = _pool(hidden, pooling).cpu().numpy().astype(np.float32)
    return vector


def extract_synopsis(
    anime: AnimeRecord, bundle: TextBundle, config: ExtractionConfig
) -> np.ndarray:
    """Pool the text model's final hidden states over the synopsis."""
    try:
        vector = _embed_text(
            anime.synopsis, bundle, config.synopsis_token_limit, config.pooling
        )
    except EmptyTextError:
        raise EmptyTextError(f"anime {anime.id} has an empty synopsis") from None
    assert vector.shape == (SYNOPSIS_DIM,)
    return vector


def extract_char_desc(
    anime: AnimeRecord,
    characters: list[CharacterRecord],
    bundle: TextBundle,
    config: ExtractionConfig,
) -> np.ndarray:
    """One vector for all character descriptions, concatenated in
    ascending character-ID order and truncated at the token limit."""
    ordered = sorted(characters, key=lambda c: c.id)
    text = "\n".join(c.description for c in ordered)
    try:
        vector = _embed_text(
            text, bundle, config.char_desc_token_limit, config.pooling
        )
    except EmptyTextError:
        raise EmptyTextError(
            f"anime {anime.id} has no character descriptions"
        ) from None
    assert vector.shape == (CHAR_DESC_DIM,)
    return vector


def load_portrait(path: str | Path) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except OSError as exc:
        raise UnreadableImageError(f"cannot read portrait {path}: {exc}") from exc


def compose_portraits(images: list[Image.Image]) -> Image.Image:
    """Concatenate horizontally, scaling every portrait to the shortest
    height present (aspect preserved)."""
    if not images:
        raise UnreadableImageError("no portrait images to compose")
    height = min(img.height for img in images)
    scaled = []
    for img in images:
        if img.height != height:
            width = max(1, round(img.width * height / img.height))
            img = img.resize((width, height), Image.BILINEAR)
        scaled.append(img)
    combined = Image.new("RGB", (sum(i.width for i in scaled), height))
    x = 0
    for img in scaled:
        combined.paste(img, (x, 0))
        x += img.width
    return combined


def extract_portraits(
    anime: AnimeRecord,
    images: list[Image.Image],
    trunk: torch.nn.Module,
    config: ExtractionConfig,
) -> np.ndarray:
    """Channel-mean of the vision trunk's final 7x7 map, flattened
    row-major. ``images`` must already be in ascending character-ID
    order."""
    if not images:
        raise UnreadableImageError(f"anime {anime.id} has no portrait images")
    combined = compose_portraits(images).resize(
        (_IMAGE_SIDE, _IMAGE_SIDE), Image.BILINEAR
    )
    array = np.asarray(combined, dtype=np.float32) / 255.0
    array = (array - _IMAGENET_MEAN) / _IMAGENET_STD
    tensor = torch.from_numpy(np.transpose(array, (2, 0, 1)))[None]
    with torch.no_grad():
        feature_map = trunk(tensor)[0]  # (channels, 7, 7)
    vector = feature_map.mean(dim=0).flatten().cpu().numpy().astype(np.float32)
    assert vector.shape == (PORTRAIT_DIM,)
    return vector
