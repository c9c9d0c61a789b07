"""Shared-character clustering and leakage-free train/test splitting.

Two animes that share at least one character must land on the same side
of the split, and so must any two animes connected through a chain of
character-sharing animes. Clusters are therefore the connected
components of the anime/shared-character graph, computed here with a
union-find structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .errors import InfeasibleSplitError, MalformedLineError

DEFAULT_TRAIN_FRACTION = 0.815


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:  # path compression
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[rj] = ri


@dataclass(frozen=True)
class ClusterAssignment:
    """Dense cluster IDs (0..cluster_count-1) per anime ID."""

    cluster_of: dict[int, int]
    cluster_count: int

    def clusters(self) -> list[list[int]]:
        """Member anime IDs per cluster, in first-appearance order."""
        members: list[list[int]] = [[] for _ in range(self.cluster_count)]
        for anime_id, cid in self.cluster_of.items():
            members[cid].append(anime_id)
        return members


@dataclass(frozen=True)
class Split:
    train: frozenset[int]
    test: frozenset[int]
    seed: int
    target_train_fraction: float

    @property
    def achieved_train_fraction(self) -> float:
        return len(self.train) / (len(self.train) + len(self.test))


def build_clusters(corpus: Corpus) -> ClusterAssignment:
    """Connected components of the shared-character graph.

    Equivalent to repeatedly relabeling animes until every
    character-sharing pair agrees on a label, but in near-linear time.
    Cluster IDs are dense and assigned in anime order of first
    appearance, so the assignment is deterministic for a given corpus.
    """
    animes = corpus.animes
    index_of = {a.id: i for i, a in enumerate(animes)}
    uf = _UnionFind(len(animes))

    by_character: dict[int, int] = {}
    for a in animes:
        i = index_of[a.id]
        for cid in a.character_ids:
            first = by_character.setdefault(cid, i)
            if first != i:
                uf.union(first, i)

    cluster_of: dict[int, int] = {}
    dense: dict[int, int] = {}
    for a in animes:
        root = uf.find(index_of[a.id])
        cluster_of[a.id] = dense.setdefault(root, len(dense))
    return ClusterAssignment(cluster_of=cluster_of, cluster_count=len(dense))


def split(
    assignment: ClusterAssignment,
    target_train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int = 42,
) -> Split:
    """Seeded random cluster-level split.

    Clusters are shuffled by a seeded permutation and assigned to the
    training side until its anime-count fraction first reaches the
    target; the cluster that crosses the target stays in train, and all
    remaining clusters go to test. Deterministic for a fixed seed.

    Raises InfeasibleSplitError when one cluster alone exceeds
    max(target, 1 - target) of the corpus, or when the greedy pass
    exhausts every cluster and would leave the test side empty.
    """
    if not 0.0 < target_train_fraction < 1.0:
        raise ValueError(f"target_train_fraction must lie in (0, 1), got {target_train_fraction}")
    if assignment.cluster_count < 2:
        raise InfeasibleSplitError(
            f"need at least 2 clusters to split, got {assignment.cluster_count}"
        )

    clusters = assignment.clusters()
    total = sum(len(c) for c in clusters)
    largest = max(len(c) for c in clusters)
    bound = max(target_train_fraction, 1.0 - target_train_fraction)
    if largest / total > bound:
        raise InfeasibleSplitError(
            f"one cluster holds {largest}/{total} animes "
            f"({largest / total:.4f} of the corpus); the closest achievable train "
            f"fractions are {largest / total:.4f} (cluster in train) or "
            f"{1.0 - largest / total:.4f} (cluster in test)"
        )

    rng = np.random.default_rng(seed)
    order = rng.permutation(assignment.cluster_count)

    train: set[int] = set()
    taken = 0
    for position, cluster_idx in enumerate(order):
        members = clusters[int(cluster_idx)]
        train.update(members)
        taken += 1
        if len(train) / total >= target_train_fraction:
            break
    if taken == assignment.cluster_count:
        raise InfeasibleSplitError(
            f"greedy assignment consumed all {taken} clusters before reaching "
            f"the target fraction {target_train_fraction}; test side would be empty"
        )

    test = {aid for aid in assignment.cluster_of if aid not in train}
    return Split(
        train=frozenset(train),
        test=frozenset(test),
        seed=seed,
        target_train_fraction=target_train_fraction,
    )


def verify_no_leakage(split_: Split, corpus: Corpus) -> list[int]:
    """Character IDs appearing on both sides of the split (empty = valid)."""
    train_chars: set[int] = set()
    test_chars: set[int] = set()
    for a in corpus.animes:
        if a.id in split_.train:
            train_chars.update(a.character_ids)
        elif a.id in split_.test:
            test_chars.update(a.character_ids)
    return sorted(train_chars & test_chars)


# -- manifest I/O ------------------------------------------------------------

def write_split_manifest(split_: Split, assignment: ClusterAssignment, path: str | Path) -> None:
    """Write the split as line-delimited records under a header line.

    The header records seed, target fraction, and achieved fraction;
    each following line is {"anime_id", "side", "cluster_id"}. Output is
    byte-deterministic for a given split.
    """
    header = {
        "seed": split_.seed,
        "target_train_fraction": split_.target_train_fraction,
        "achieved_train_fraction": split_.achieved_train_fraction,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for anime_id in sorted(split_.train | split_.test):
            side = "train" if anime_id in split_.train else "test"
            record = {
                "anime_id": anime_id,
                "side": side,
                "cluster_id": assignment.cluster_of[anime_id],
            }
            fh.write(json.dumps(record) + "\n")


def read_split_manifest(path: str | Path) -> tuple[Split, dict[int, int]]:
    """Read a split manifest; returns the Split and the cluster-ID map."""
    train: set[int] = set()
    test: set[int] = set()
    cluster_of: dict[int, int] = {}
    header: dict | None = None
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_number, f"invalid JSON ({exc.msg})") from exc
            if header is None:
                if not {"seed", "target_train_fraction", "achieved_train_fraction"} <= set(record):
                    raise MalformedLineError(line_number, "first line must be the split header")
                header = record
                continue
            try:
                anime_id = record["anime_id"]
                side = record["side"]
                cluster_of[anime_id] = record["cluster_id"]
            except (KeyError, TypeError) as exc:
                raise MalformedLineError(line_number, f"bad split record: {exc}") from exc
            if side == "train":
                train.add(anime_id)
            elif side == "test":
                test.add(anime_id)
            else:
                raise MalformedLineError(line_number, f"side must be 'train' or 'test', got {side!r}")
    if header is None:
        raise MalformedLineError(1, "split manifest is empty")
    split_ = Split(
        train=frozenset(train),
        test=frozenset(test),
        seed=int(header["seed"]),
        target_train_fraction=float(header["target_train_fraction"]),
    )
    return split_, cluster_of
