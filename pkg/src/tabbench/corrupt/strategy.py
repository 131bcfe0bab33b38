"""Named corruption presets and a callable that applies one to batches."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datahub.preprocess import FeatureStats
from .fill import FillStrategy, fill, wcr_replace
from .kmeans import ClusterModel, fit_kmeans
from .mask import MaskSpec, gen_mask


@dataclass(frozen=True)
class CorruptionStrategy:
    fill: FillStrategy
    mask: MaskSpec = field(default_factory=MaskSpec.fixed_fraction)

    @classmethod
    def named(cls, name: str, rate: float | None = None, lam: float = 0.5) -> "CorruptionStrategy":
        if name in ("pass", "wcr"):
            return cls(FillStrategy(name), MaskSpec.none())
        if name == "saint":
            return cls(FillStrategy("cutmix"), MaskSpec.bernoulli(0.3 if rate is None else rate))
        return cls(FillStrategy(name, lam), MaskSpec.fixed_fraction(0.6 if rate is None else rate))


class Corruptor:
    """Binds a strategy to a training matrix (donor pool, statistics, clusters)."""

    def __init__(self, strategy: CorruptionStrategy, train: np.ndarray, n_classes: int, rng: np.random.Generator):
        self.strategy = strategy
        self.train = np.asarray(train, dtype=np.float64)
        self.stats = FeatureStats.of_matrix(self.train)
        self.clusters: ClusterModel | None = None
        if strategy.fill.kind == "wcr":
            k = min(n_classes, len(np.unique(self.train, axis=0)))
            self.clusters = fit_kmeans(self.train, k, rng)

    def __call__(self, batch: np.ndarray, rng: np.random.Generator, rows: np.ndarray | None = None) -> np.ndarray:
        if self.strategy.fill.kind == "wcr":
            return wcr_replace(batch, self.clusters, self.train, rng, rows)
        if not self.strategy.fill.uses_mask:
            return np.array(batch, dtype=np.float64, copy=True)
        mask = gen_mask(np.shape(batch), self.strategy.mask, rng)
        return fill(batch, mask, self.strategy.fill, rng, stats=self.stats, donors=self.train)
