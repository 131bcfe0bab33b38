"""Filling rules for masked cells, plus whole-row within-cluster replacement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datahub.preprocess import FeatureStats
from .kmeans import ClusterModel

FILL_KINDS = ("pass", "zero", "noise", "sample", "cutmix", "rfc", "mixup", "wcr")
DONOR_KINDS = ("cutmix", "rfc", "mixup")


@dataclass(frozen=True)
class FillStrategy:
    kind: str
    lam: float = 0.5

    def __post_init__(self):
        if self.kind not in FILL_KINDS:
            raise ValueError(f"fill kind must be one of {FILL_KINDS}, got {self.kind!r}")
        if self.kind == "mixup" and not 0.0 < self.lam < 1.0:
            raise ValueError(f"MixUp lambda must lie in (0, 1), got {self.lam}")

    @property
    def uses_mask(self) -> bool:
        return self.kind not in ("pass", "wcr")


@dataclass
class FillTrace:
    """Which donor row fed each cell (-1 where no donor was used)."""

    donor_rows: np.ndarray


def fill(
    batch: np.ndarray,
    mask: np.ndarray,
    strategy: FillStrategy,
    rng: np.random.Generator,
    stats: FeatureStats | None = None,
    donors: np.ndarray | None = None,
    trace: bool = False,
):
    batch = np.asarray(batch, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != batch.shape:
        raise ValueError(f"mask shape {mask.shape} differs from batch {batch.shape}")
    b, d = batch.shape
    src = np.full((b, d), -1, dtype=np.int64)
    kind = strategy.kind

    if kind == "wcr":
        raise ValueError("WCR replaces whole rows; use wcr_replace")
    if kind == "pass":
        out = batch.copy()
    elif kind == "zero":
        out = np.where(mask, 0.0, batch)
    elif kind == "noise":
        out = np.where(mask, batch + rng.standard_normal((b, d)), batch)
    elif kind == "sample":
        if stats is None:
            raise ValueError("Sample filling needs feature statistics")
        if len(stats.mean) != d:
            raise ValueError("statistics width differs from batch width")
        draws = stats.mean + stats.std * rng.standard_normal((b, d))
        out = np.where(mask, draws, batch)
    else:
        if donors is None or len(donors) == 0:
            raise ValueError(f"{kind} filling needs a non-empty donor pool")
        donors = np.asarray(donors, dtype=np.float64)
        if donors.shape[1] != d:
            raise ValueError("donor width differs from batch width")
        cols = np.arange(d)
        if kind == "rfc":
            rows = rng.integers(0, len(donors), size=(b, d))
        else:
            rows = np.repeat(rng.integers(0, len(donors), size=b)[:, None], d, axis=1)
        picked = donors[rows, cols]
        if kind == "mixup":
            picked = strategy.lam * batch + (1.0 - strategy.lam) * picked
        out = np.where(mask, picked, batch)
        src = np.where(mask, rows, -1)
    return (out, FillTrace(src)) if trace else out


def wcr_replace(
    batch: np.ndarray,
    model: ClusterModel,
    donors: np.ndarray,
    rng: np.random.Generator,
    rows: np.ndarray | None = None,
    trace: bool = False,
):
    """Replace each row by a different training row from the same cluster.

    ``rows`` gives the training index of each batch row (so it can be excluded
    and its stored assignment used); rows without an index (-1 or ``rows=None``)
    are assigned to their nearest centroid and may draw any member.
    """
    if model is None or model.k == 0:
        raise ValueError("WCR needs a fitted cluster model")
    batch = np.asarray(batch, dtype=np.float64)
    donors = np.asarray(donors, dtype=np.float64)
    if len(donors) != len(model.labels):
        raise ValueError("donor matrix must be the clustered training matrix")
    rows = np.full(len(batch), -1) if rows is None else np.asarray(rows)
    known = rows >= 0
    clusters = np.empty(len(batch), dtype=np.int64)
    clusters[known] = model.labels[rows[known]]
    if (~known).any():
        clusters[~known] = model.predict(batch[~known])
    members = model.members()
    out = batch.copy()
    chosen = np.full(len(batch), -1, dtype=np.int64)
    for i, c in enumerate(clusters):
        pool = members[c]
        if known[i]:
            pool = pool[pool != rows[i]]
        if len(pool) == 0:
            continue
        chosen[i] = pool[rng.integers(len(pool))]
        out[i] = donors[chosen[i]]
    return (out, chosen) if trace else out
