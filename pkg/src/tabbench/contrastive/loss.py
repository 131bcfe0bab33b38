"""InfoNCE over cosine similarities."""

from __future__ import annotations

import logging

import numpy as np

from ..ndcore import Tensor, exp, log, pairwise_cosine
from ..ndcore.tensor import as_tensor
from .pairs import PairIndex

log_ = logging.getLogger(__name__)

NORM_EPS = 1e-8


def info_nce(embeddings, index: PairIndex, temperature: float = 1.0) -> Tensor:
    """Mean over anchors of -log(exp(s_pos/t) / sum_candidates exp(s/t))."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    z = as_tensor(embeddings)
    norms = np.linalg.norm(z.data, axis=1)
    if (norms < NORM_EPS).any():
        log_.warning("%d zero-norm embeddings; cosine uses an epsilon floor", int((norms < NORM_EPS).sum()))
    S = pairwise_cosine(z, eps=NORM_EPS) * (1.0 / temperature)
    pos = S[index.pos[:, 0], index.pos[:, 1]]
    cand = S[index.cand_rows, index.cand_cols]
    mask = index.cand_mask
    shift = np.where(mask, cand.data, -np.inf).max(axis=1, keepdims=True)
    lse = log((exp(cand - shift) * mask.astype(np.float64)).sum(axis=1)) + shift[:, 0]
    return (lse - pos).mean()


def brute_force_info_nce(views: np.ndarray, index: PairIndex, temperature: float = 1.0) -> float:
    """Loop-by-loop reference evaluation, for testing."""
    def cos(u, v):
        return float(u @ v / (max(np.linalg.norm(u), NORM_EPS) * max(np.linalg.norm(v), NORM_EPS)))

    total = 0.0
    for a in range(index.n_anchors):
        u, v = index.pos[a]
        num = np.exp(cos(views[u], views[v]) / temperature)
        den = sum(
            np.exp(cos(views[r], views[c]) / temperature)
            for r, c, m in zip(index.cand_rows[a], index.cand_cols[a], index.cand_mask[a])
            if m
        )
        total += -np.log(num / den)
    return total / index.n_anchors
