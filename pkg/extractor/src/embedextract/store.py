"""Writer for the binary embedding container the regression pipeline
reads.

Layout (all little-endian): magic "AEM1", version u32, record count
u64; each record is anime id u64, kind u8, dimension u32, then the
float32 values. Kinds: 0 synopsis, 1 character descriptions,
2 portraits.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import StoreError

MAGIC = b"AEM1"
VERSION = 1

KIND_SYNOPSIS = 0
KIND_CHAR_DESC = 1
KIND_PORTRAIT = 2

KIND_DIMS = {KIND_SYNOPSIS: 768, KIND_CHAR_DESC: 768, KIND_PORTRAIT: 49}


def write_store(
    entries: list[tuple[int, int, np.ndarray]], path: str | Path
) -> None:
    """Write (anime_id, kind, vector) entries, sorted by id then kind."""
    checked = []
    for anime_id, kind, vector in entries:
        if kind not in KIND_DIMS:
            raise StoreError(f"unknown embedding kind {kind}")
        vec = np.asarray(vector, dtype=np.float32)
        if vec.shape != (KIND_DIMS[kind],):
            raise StoreError(
                f"kind {kind} vector for anime {anime_id} has shape "
                f"{vec.shape}, expected ({KIND_DIMS[kind]},)"
            )
        if not np.all(np.isfinite(vec)):
            raise StoreError(f"non-finite values in vector for anime {anime_id}")
        checked.append((int(anime_id), int(kind), vec))

    checked.sort(key=lambda e: (e[0], e[1]))
    with Path(path).open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", VERSION, len(checked)))
        for anime_id, kind, vec in checked:
            f.write(struct.pack("<QBI", anime_id, kind, vec.shape[0]))
            f.write(vec.astype("<f4").tobytes())
