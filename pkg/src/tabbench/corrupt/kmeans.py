"""k-means++ seeding followed by Lloyd iterations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ClusterModel:
    centroids: np.ndarray
    labels: np.ndarray
    inertia_history: list[float] = field(default_factory=list)
    n_iter: int = 0

    @property
    def k(self) -> int:
        return len(self.centroids)

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _nearest(np.asarray(X, dtype=np.float64), self.centroids)[0]

    def members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == c) for c in range(self.k)]


def _sq_dists(X, C):
    d2 = (X**2).sum(1)[:, None] - 2.0 * X @ C.T + (C**2).sum(1)[None, :]
    return np.maximum(d2, 0.0)


def _nearest(X, C):
    d2 = _sq_dists(X, C)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(X)), labels]


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(X)
    centers = [X[rng.integers(n)]]
    closest = _sq_dists(X, np.array(centers))[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # every remaining point coincides with a centre
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centers.append(X[idx])
        closest = np.minimum(closest, _sq_dists(X, X[idx : idx + 1])[:, 0])
    return np.array(centers)


def fit_kmeans(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 300) -> ClusterModel:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("k-means needs a non-empty 2-d matrix")
    n_distinct = len(np.unique(X, axis=0))
    if not 1 <= k <= n_distinct:
        raise ValueError(f"K={k} must lie in [1, {n_distinct}] (distinct rows)")
    C = kmeans_plus_plus(X, k, rng)
    labels, dist = _nearest(X, C)
    history = [float(dist.sum())]
    it = 0
    for it in range(1, max_iter + 1):
        for c in range(k):
            members = labels == c
            if members.any():
                C[c] = X[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the point worst served by its centre
                far = int(dist.argmax())
                C[c] = X[far]
                dist[far] = 0.0
        new_labels, dist = _nearest(X, C)
        history.append(float(dist.sum()))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return ClusterModel(C, labels, history, it)
