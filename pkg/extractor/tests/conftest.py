"""Shared fixtures: a tiny local text model, portrait images, and a
3-anime corpus.

The text model is a one-layer transformer with the contract's 768-wide
hidden states and a word-level tokenizer, built deterministically on
disk so tests never touch a model hub.
"""

import json

import numpy as np
import pytest
import torch
from PIL import Image

WORDS = [
    "a", "the", "and", "of", "girl", "boy", "sword", "school", "space",
    "pirate", "ghost", "summer", "tournament", "mecha", "idol", "dragon",
    "detective", "legend", "journey", "kitchen", "garden", "island",
    "shadow", "machine", "melody", "storm", "library", "festival",
    "teacher", "rival", "promise", "memory", "star", "sea", "city",
    "forest", "letter", "game", "club", "band",
]


def make_text(rng, n_words):
    return " ".join(rng.choice(WORDS) for _ in range(n_words))


@pytest.fixture(scope="session")
def tiny_text_model_dir(tmp_path_factory):
    from tokenizers import Tokenizer
    from tokenizers.models import WordLevel
    from tokenizers.pre_tokenizers import Whitespace
    from transformers import GPT2Config, GPT2Model, PreTrainedTokenizerFast

    out = tmp_path_factory.mktemp("tiny_text_model")
    torch.manual_seed(7)
    config = GPT2Config(
        vocab_size=len(WORDS) + 1,
        n_positions=512,
        n_embd=768,
        n_layer=1,
        n_head=4,
        bos_token_id=0,
        eos_token_id=0,
    )
    model = GPT2Model(config)
    model.eval()
    model.save_pretrained(out)

    vocab = {"[UNK]": 0, **{w: i + 1 for i, w in enumerate(WORDS)}}
    tokenizer = Tokenizer(WordLevel(vocab, unk_token="[UNK]"))
    tokenizer.pre_tokenizer = Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer, unk_token="[UNK]", model_max_length=512
    )
    fast.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def images_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("portraits")
    rng = np.random.default_rng(5)
    # heterogeneous sizes exercise the height normalization
    sizes = {"p0": (16, 16), "p1": (24, 18), "p2": (12, 20), "p3": (16, 16)}
    for ref, (w, h) in sizes.items():
        pixels = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        Image.fromarray(pixels, "RGB").save(out / f"{ref}.png")
    return out


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus") / "corpus.jsonl"
    rng = np.random.default_rng(11)
    records = [
        {"kind": "character", "id": 0, "name": "Aoi",
         "description": make_text(rng, 30), "portrait_ref": "p0"},
        {"kind": "character", "id": 1, "name": "Riko",
         "description": make_text(rng, 40), "portrait_ref": "p1"},
        {"kind": "character", "id": 2, "name": "Gen",
         "description": make_text(rng, 25), "portrait_ref": "p2"},
        {"kind": "character", "id": 3, "name": "Mika",
         "description": make_text(rng, 35), "portrait_ref": "p3"},
        {"kind": "anime", "id": 10, "title": "First",
         "synopsis": make_text(rng, 60), "character_ids": [0, 1]},
        {"kind": "anime", "id": 11, "title": "Second",
         "synopsis": make_text(rng, 200), "character_ids": [2]},
        {"kind": "anime", "id": 12, "title": "Third",
         "synopsis": make_text(rng, 45), "character_ids": [1, 2, 3]},
    ]
    out.write_text("\n".join(json.dumps(r) for r in records) + "\n",
                   encoding="utf-8")
    return out


@pytest.fixture(scope="session")
def config(tiny_text_model_dir):
    from embedextract import ExtractionConfig

    return ExtractionConfig(
        text_model=str(tiny_text_model_dir),
        vision_model="resnet50-untrained",
    )


@pytest.fixture(scope="session")
def text_bundle(config):
    from embedextract import load_text_model

    return load_text_model(config)


@pytest.fixture(scope="session")
def vision_trunk(config):
    from embedextract import load_vision_trunk

    return load_vision_trunk(config)
