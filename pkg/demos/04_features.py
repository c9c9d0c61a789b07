"""Feature assembly: embedding files, TF-IDF, and pixel vectors.

Deep variants consume precomputed embeddings from a binary container
(synopsis and character-description vectors are 768-wide, portrait
vectors 49-wide).  The traditional baseline builds its own features:
two 750-term TF-IDF blocks plus a 750-value pixel block.
"""

import tempfile
from pathlib import Path

import numpy as np

from animepop import (
    EmbeddingKind,
    ScoreParams,
    image_to_vector,
    index_embeddings,
    parse_corpus,
    read_embeddings,
    resolve_golden_scores,
    tfidf_fit,
    tfidf_transform,
    tokenize,
    write_fixture,
)

with tempfile.TemporaryDirectory() as tmp:
    paths = write_fixture(Path(tmp), n_animes=30, seed=5)
    corpus = resolve_golden_scores(parse_corpus(paths["corpus"]), ScoreParams())

    # The embedding container round-trips float32 bits exactly.
    records = read_embeddings(paths["embeddings"])
    store = index_embeddings(records)
    print(f"embedding store: {len(records)} records")
    first = corpus.animes[0].id
    syn = store[(first, EmbeddingKind.SYNOPSIS)]
    print(f"anime {first} synopsis vector: dim={syn.shape[0]} dtype={syn.dtype}")

    # TF-IDF: vocabulary ranked by document frequency, ties alphabetic.
    docs = [a.synopsis for a in corpus.animes[:20]]
    vocab = tfidf_fit(docs, max_features=10)
    print(f"\ntop-10 vocabulary: {vocab.terms}")
    probe = f"the {vocab.terms[0]} and the {vocab.terms[1]} {vocab.terms[0]}"
    vec = tfidf_transform(probe, vocab)
    print(f"transform({probe!r}) -> L2 norm {np.linalg.norm(vec):.6f}")
    unknown = tfidf_transform("zzz qqq", vocab)
    print(f"all-unknown text stays a zero vector: norm {np.linalg.norm(unknown)}")
    print(f"tokenize('Re:Zero, Act-2!') -> {tokenize('Re:Zero, Act-2!')}")

    # Pixel features: scale to [0,1], channel-major flatten, fit to 750.
    image = np.arange(16 * 16 * 3, dtype=np.uint8).reshape(16, 16, 3)
    pix = image_to_vector(image)
    print(f"\n16x16x3 image -> vector of {pix.shape[0]} "
          f"(768 values truncated to 750), max={pix.max():.4f}")
