"""Classification metrics."""

from __future__ import annotations

import numpy as np


def _check(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("label vectors must be 1-d and of equal length")
    if len(y_true) == 0:
        raise ValueError("empty label vectors")
    return y_true, y_pred


def weighted_f1(y_true, y_pred, n_classes: int | None = None) -> float:
    """Per-class F1 weighted by true-class support; undefined F1 counts as 0."""
    y_true, y_pred = _check(y_true, y_pred)
    C = int(max(y_true.max(), y_pred.max()) + 1) if n_classes is None else n_classes
    conf = np.zeros((C, C), dtype=np.int64)
    np.add.at(conf, (y_true, y_pred), 1)
    tp = np.diag(conf).astype(np.float64)
    support = conf.sum(axis=1)
    predicted = conf.sum(axis=0)
    denom = support + predicted
    f1 = np.divide(2 * tp, denom, out=np.zeros(C), where=denom > 0)
    return float((f1 * support).sum() / support.sum())


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = _check(y_true, y_pred)
    return float(np.mean(y_true == y_pred))
