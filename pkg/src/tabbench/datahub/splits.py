"""Reproducible 70/10/20 train/validation/test partitions."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

TRAIN, VAL, TEST = 0.7, 0.1, 0.2


@dataclass(frozen=True)
class SplitTriple:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int
    split_id: int


def stable_hash(*parts) -> int:
    """64-bit integer digest of the parts' string forms; stable across processes."""
    text = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def split_sizes(n: int) -> tuple[int, int, int]:
    n_val = math.floor(VAL * n + 0.5)
    n_test = math.floor(TEST * n + 0.5)
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"{n} rows cannot form three non-empty parts")
    return n_train, n_val, n_test


def make_split(n: int, seed: int, split_id: int, key: str = "") -> SplitTriple:
    n_train, n_val, _ = split_sizes(n)
    rng = np.random.default_rng([seed & 0xFFFFFFFF, stable_hash(key) & 0xFFFFFFFF, split_id])
    perm = rng.permutation(n)
    return SplitTriple(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
        seed=seed,
        split_id=split_id,
    )


def make_splits(ds_or_n, seed: int, count: int = 30, key: str | None = None) -> list[SplitTriple]:
    """``count`` independent shuffles keyed by (dataset id, seed, split id)."""
    if isinstance(ds_or_n, (int, np.integer)):
        n, key = int(ds_or_n), key or ""
    else:
        n, key = ds_or_n.n, key if key is not None else ds_or_n.dataset_id
    if n < 10:
        raise ValueError(f"need at least 10 rows to split, got {n}")
    return [make_split(n, seed, s, key) for s in range(count)]
