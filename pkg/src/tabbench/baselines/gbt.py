"""Multiclass gradient-boosted regression trees with a softmax link."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..ndcore import NonFiniteError
from .logreg import _softmax, check_inputs

GBT_GRID = {"max_depth": (2, 3, 4), "n_rounds": (100, 300), "learning_rate": (0.05, 0.1)}


@dataclass
class Tree:
    """Flat binary tree; ``feature == -1`` marks a leaf. Rows with x <= threshold go left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return self.value[node]
            rows = np.flatnonzero(active)
            go_left = X[rows, f[rows]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])


def _best_split(X, r, M):
    """Best MSE split of the node whose rows, sorted per feature, are the rows of M (p, m)."""
    p, m = M.shape
    if m < 2:
        return None
    vals = X[M, np.arange(p)[:, None]]
    rs = r[M]
    total = rs[0].sum()
    left_sum = np.cumsum(rs, axis=1)[:, :-1]
    k = np.arange(1, m)
    gain = left_sum**2 / k + (total - left_sum) ** 2 / (m - k) - total**2 / m
    gain = np.where(vals[:, :-1] < vals[:, 1:], gain, -np.inf)
    flat = int(np.argmax(gain))
    f, pos = divmod(flat, m - 1)
    if gain[f, pos] == -np.inf:
        return None
    # an impure node splits even at zero gain (XOR needs this at the root)
    if ((rs[0] - total / m) ** 2).sum() <= 1e-12 * m:
        return None
    lo, hi = vals[f, pos], vals[f, pos + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return f, thr


def build_tree(X, r, order, max_depth, leaf_value) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(M, depth):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(leaf_value(M[0]))
        split = _best_split(X, r, M) if depth < max_depth else None
        if split is None:
            return node
        f, thr = split
        goes_left = X[:, f] <= thr
        sel = goes_left[M]
        n_left = int(sel[0].sum())
        ML = M[sel].reshape(M.shape[0], n_left)
        MR = M[~sel].reshape(M.shape[0], M.shape[1] - n_left)
        feature[node], threshold[node] = f, thr
        left[node] = grow(ML, depth + 1)
        right[node] = grow(MR, depth + 1)
        return node

    grow(order, 0)
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )


@dataclass
class GbtModel:
    init: np.ndarray
    learning_rate: float
    max_depth: int
    rounds: list[list[Tree]] = field(default_factory=list)
    n_features: int = 0

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def staged_raw(self, X):
        """Yield raw scores after 0, 1, ..., n_rounds rounds."""
        X = self._check(X)
        F = np.tile(self.init, (len(X), 1))
        yield F.copy()
        for trees in self.rounds:
            for k, t in enumerate(trees):
                F[:, k] += self.learning_rate * t.predict(X)
            yield F.copy()

    def raw(self, X, n_rounds: int | None = None):
        n_rounds = self.n_rounds if n_rounds is None else n_rounds
        for t, F in enumerate(self.staged_raw(X)):
            if t == n_rounds:
                return F
        raise ValueError(f"model has only {self.n_rounds} rounds")

    def predict_proba(self, X, n_rounds=None):
        return _softmax(self.raw(X, n_rounds))

    def predict(self, X, n_rounds=None):
        return self.raw(X, n_rounds).argmax(axis=1)

    def truncated(self, n_rounds: int) -> "GbtModel":
        return GbtModel(self.init, self.learning_rate, self.max_depth, self.rounds[:n_rounds], self.n_features)

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features")
        return X

    def to_arrays(self):
        out = {"init": self.init, "learning_rate": np.array(self.learning_rate), "max_depth": np.array(self.max_depth)}
        for t, trees in enumerate(self.rounds):
            for k, tree in enumerate(trees):
                for name in ("feature", "threshold", "left", "right", "value"):
                    out[f"round{t}.class{k}.{name}"] = getattr(tree, name)
        out["n_features"] = np.array(self.n_features)
        return out

    @classmethod
    def from_arrays(cls, a):
        C = len(a["init"])
        n_rounds = sum(1 for k in a if k.endswith(".class0.value"))
        rounds = [
            [Tree(*(a[f"round{t}.class{k}.{n}"] for n in ("feature", "threshold", "left", "right", "value"))) for k in range(C)]
            for t in range(n_rounds)
        ]
        return cls(a["init"], float(a["learning_rate"]), int(a["max_depth"]), rounds, int(a["n_features"]))


def train_gbt(X, y, n_rounds: int, max_depth: int, learning_rate: float, n_classes=None) -> GbtModel:
    X, y, C = check_inputs(X, y, n_classes)
    n = len(X)
    Y = np.eye(C)[y]
    prior = np.clip(Y.mean(axis=0), 1e-12, None)
    init = np.log(prior)
    order = np.argsort(X, axis=0, kind="stable").T.copy()
    F = np.tile(init, (n, 1))
    model = GbtModel(init, learning_rate, max_depth, [], X.shape[1])
    scale = (C - 1) / C
    for _ in range(n_rounds):
        R = Y - _softmax(F)
        if not np.isfinite(R).all():
            raise NonFiniteError("non-finite boosting residuals")
        trees = []
        for k in range(C):
            r = R[:, k]
            h = np.abs(r) * (1 - np.abs(r))

            def leaf_value(rows, r=r, h=h):
                den = h[rows].sum()
                return 0.0 if den < 1e-12 else scale * r[rows].sum() / den

            tree = build_tree(X, r, order, max_depth, leaf_value)
            trees.append(tree)
        for k, tree in enumerate(trees):
            F[:, k] += learning_rate * tree.predict(X)
        model.rounds.append(trees)
    return model


def grid_points(grid=GBT_GRID):
    keys = list(grid)
    return [dict(zip(keys, vals)) for vals in itertools.product(*(grid[k] for k in keys))]


def fit_gbt(X_train, y_train, X_val, y_val, n_classes=None, grid=GBT_GRID) -> GbtModel:
    """Grid search by validation accuracy (first listed wins ties).

    Configurations differing only in round count share one training run; the
    shorter ones are read off its staged predictions.
    """
    points = grid_points(grid)
    if not points:
        raise ValueError("empty grid")
    y_val = np.asarray(y_val)
    fitted: dict[tuple, GbtModel] = {}
    staged_acc: dict[tuple, list[float]] = {}
    for pt in points:
        key = (pt["max_depth"], pt["learning_rate"])
        if key in fitted:
            continue
        longest = max(q["n_rounds"] for q in points if (q["max_depth"], q["learning_rate"]) == key)
        m = train_gbt(X_train, y_train, longest, pt["max_depth"], pt["learning_rate"], n_classes)
        fitted[key] = m
        staged_acc[key] = [float(np.mean(F.argmax(1) == y_val)) for F in m.staged_raw(X_val)]
    best, best_acc = None, -1.0
    for pt in points:
        key = (pt["max_depth"], pt["learning_rate"])
        acc = staged_acc[key][pt["n_rounds"]]
        if acc > best_acc:
            best, best_acc = (key, pt["n_rounds"]), acc
    (key, rounds) = best
    return fitted[key].truncated(rounds)
