"""Positive/negative pair bookkeeping for the three pair schemes.

Every scheme lays its views out as one (2N, d) matrix and describes, per
anchor, the positive pair and the candidate pairs of the InfoNCE denominator
as (row, column) indices into the 2N x 2N similarity matrix:

* simclr:   views = [c1(x); c2(x)]; anchor i pairs with i±N; candidates (i, k) for k != i
* scarf:    views = [x; c(x)];      anchor i pairs with N+i; candidates (i, N+j) for all j
* proposed: as scarf, plus (i, j) and (N+i, N+j) for j != i
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

SCHEMES = ("simclr", "scarf", "proposed")


@dataclass(frozen=True)
class PairIndex:
    n_samples: int
    pos: np.ndarray  # (A, 2) row/column of each anchor's positive pair
    cand_rows: np.ndarray  # (A, M)
    cand_cols: np.ndarray  # (A, M)
    cand_mask: np.ndarray  # (A, M) False for padding

    @property
    def n_anchors(self) -> int:
        return len(self.pos)


@dataclass(frozen=True)
class PairBatch:
    views: np.ndarray
    index: PairIndex
    scheme: str


def pair_index(n: int, scheme: str) -> PairIndex:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown pair scheme {scheme!r}; choose from {SCHEMES}")
    if n < 1:
        raise ValueError("need at least one sample")
    i = np.arange(n)
    if scheme == "simclr":
        a = np.arange(2 * n)
        pos = np.stack([a, (a + n) % (2 * n)], axis=1)
        others = np.array([[k for k in range(2 * n) if k != r] for r in a]).reshape(2 * n, 2 * n - 1)
        rows = np.repeat(a[:, None], 2 * n - 1, axis=1)
        return PairIndex(n, pos, rows, others, np.ones_like(others, dtype=bool))

    pos = np.stack([i, n + i], axis=1)
    rows = np.repeat(i[:, None], n, axis=1)
    cols = np.repeat((n + i)[None, :], n, axis=0)
    mask = np.ones((n, n), dtype=bool)
    if scheme == "proposed" and n > 1:
        off = np.array([[j for j in range(n) if j != r] for r in i]).reshape(n, n - 1)
        rows = np.hstack([rows, np.repeat(i[:, None], n - 1, axis=1), n + np.repeat(i[:, None], n - 1, axis=1)])
        cols = np.hstack([cols, off, n + off])
        mask = np.ones(rows.shape, dtype=bool)
    return PairIndex(n, pos, rows, cols, mask)


def build_pairs(
    batch: np.ndarray,
    scheme: str,
    corrupt: Callable[[np.ndarray, np.random.Generator], np.ndarray],
    rng: np.random.Generator,
) -> PairBatch:
    batch = np.asarray(batch, dtype=np.float64)
    if len(batch) < 2:
        raise ValueError("a contrastive batch needs at least two samples")
    if scheme == "simclr":
        views = np.vstack([corrupt(batch, rng), corrupt(batch, rng)])
    else:
        views = np.vstack([batch, corrupt(batch, rng)])
    return PairBatch(views, pair_index(len(batch), scheme), scheme)
