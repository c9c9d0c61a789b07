"""Extraction configuration."""

from __future__ import annotations

from dataclasses import dataclass

SYNOPSIS_DIM = 768
CHAR_DESC_DIM = 768
PORTRAIT_DIM = 49

POOLING_STRATEGIES = ("mean", "last", "max")

# "<name>-untrained" vision/text variants use architecture-only weights
# seeded from this constant, so hermetic environments stay deterministic.
UNTRAINED_SEED = 0


@dataclass(frozen=True)
class ExtractionConfig:
    """Model names, tokenizer limits, and the pooling strategy.

    Model names are forwarded to the respective hubs; a filesystem path
    loads a local text model instead.
    """

    text_model: str = "gpt2"
    vision_model: str = "resnet50"
    synopsis_token_limit: int = 128
    char_desc_token_limit: int = 256
    pooling: str = "mean"

    def __post_init__(self):
        if self.synopsis_token_limit <= 0 or self.char_desc_token_limit <= 0:
            raise ValueError("token limits must be positive")
        if self.pooling not in POOLING_STRATEGIES:
            raise ValueError(
                f"unknown pooling {self.pooling!r}; "
                f"choose from {', '.join(POOLING_STRATEGIES)}"
            )
