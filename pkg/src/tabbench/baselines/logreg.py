"""L2-regularised multinomial logistic regression by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ndcore import NonFiniteError

L2_GRID = (0.001, 0.01, 0.1, 1.0, 10.0)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def check_inputs(X, y, n_classes=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (n, p) with one label per row")
    C = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if C < 2 or len(np.unique(y)) < 2:
        raise ValueError("training labels must contain at least two classes")
    if y.min() < 0 or y.max() >= C:
        raise ValueError("labels out of range")
    return X, y, C


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: np.ndarray
    l2: float
    n_iter: int = 0

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.weights.shape[0]:
            raise ValueError(f"expected {self.weights.shape[0]} features, got {X.shape[1]}")
        return X @ self.weights + self.bias

    def predict_proba(self, X):
        return _softmax(self.decision_function(X))

    def predict(self, X):
        return self.decision_function(X).argmax(axis=1)

    def to_arrays(self):
        return {"weights": self.weights, "bias": self.bias, "l2": np.array(self.l2)}

    @classmethod
    def from_arrays(cls, arrays):
        return cls(arrays["weights"], arrays["bias"], float(arrays["l2"]))


def _objective(W, b, X, Y, l2):
    n = len(X)
    P = _softmax(X @ W + b)
    ce = -np.log(np.clip((P * Y).sum(axis=1), 1e-300, None)).mean()
    loss = ce + l2 / (2 * n) * (W**2).sum()
    G = (P - Y) / n
    return loss, X.T @ G + (l2 / n) * W, G.sum(axis=0)


def train_logreg(X, y, l2: float, n_classes=None, tol: float = 1e-6, max_iter: int = 5000) -> LogRegModel:
    """Minimise mean cross-entropy + l2/(2n)·||W||² (bias unpenalised) with Armijo backtracking."""
    X, y, C = check_inputs(X, y, n_classes)
    Y = np.eye(C)[y]
    W = np.zeros((X.shape[1], C))
    b = np.zeros(C)
    loss, gW, gb = _objective(W, b, X, Y, l2)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        gnorm2 = (gW**2).sum() + (gb**2).sum()
        if np.sqrt(gnorm2) < tol:
            break
        while True:
            W_new, b_new = W - step * gW, b - step * gb
            new_loss, new_gW, new_gb = _objective(W_new, b_new, X, Y, l2)
            if new_loss <= loss - 0.5 * step * gnorm2 or step < 1e-12:
                break
            step *= 0.5
        if not np.isfinite(new_loss):
            raise NonFiniteError("logistic regression loss became non-finite")
        W, b, loss, gW, gb = W_new, b_new, new_loss, new_gW, new_gb
        step = min(step * 2.0, 1e3)
    return LogRegModel(W, b, float(l2), it)


def fit_logreg(X_train, y_train, X_val, y_val, n_classes=None, grid=L2_GRID) -> LogRegModel:
    """Grid search over L2 strength; highest validation accuracy wins, first listed on ties."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    best, best_acc = None, -1.0
    for l2 in grid:
        model = train_logreg(X_train, y_train, l2, n_classes)
        acc = float(np.mean(model.predict(X_val) == np.asarray(y_val)))
        if acc > best_acc:
            best, best_acc = model, acc
    return best
