"""Leakage-free train/test splitting.

Two animes sharing a character must land on the same side of the split,
otherwise evaluation leaks: the model sees test characters during
training.  Animes are grouped into connected clusters over shared
characters, and whole clusters are dealt to one side or the other.
"""

import tempfile
from pathlib import Path

from animepop import (
    ScoreParams,
    build_clusters,
    parse_corpus,
    read_split_manifest,
    resolve_golden_scores,
    split,
    verify_no_leakage,
    write_fixture,
    write_split_manifest,
)

with tempfile.TemporaryDirectory() as tmp:
    paths = write_fixture(Path(tmp), n_animes=200, seed=3)
    corpus = resolve_golden_scores(parse_corpus(paths["corpus"]), ScoreParams())

    assignment = build_clusters(corpus)
    sizes = sorted((len(m) for m in assignment.clusters()), reverse=True)
    print(f"{len(corpus.animes)} animes form {assignment.cluster_count} clusters")
    print(f"largest clusters: {sizes[:8]}")

    s = split(assignment, target_train_fraction=0.815, seed=42)
    print(f"\ntrain {len(s.train)}, test {len(s.test)} "
          f"(achieved fraction {s.achieved_train_fraction:.4f})")
    print("clusters move whole, so a giant cluster can push the achieved")
    print("fraction past the 0.815 target; hygiene beats exactness here")

    shared = verify_no_leakage(s, corpus)
    print(f"characters appearing on both sides: {len(shared)}")

    # The split is an artifact: write it once, reuse it everywhere.
    manifest = Path(tmp) / "split.json"
    write_split_manifest(s, assignment, manifest)
    reread, cluster_of = read_split_manifest(manifest)
    print(f"manifest round-trips: {reread == s}")

    # Different seeds deal different clusters, same hygiene.
    for seed in (1, 2, 3):
        alt = split(assignment, seed=seed)
        print(f"seed {seed}: train {len(alt.train):3d} "
              f"leaks {len(verify_no_leakage(alt, corpus))}")
