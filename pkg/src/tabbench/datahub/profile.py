"""Dataset characterisation: FS-ratio, C-score and the Hard/Easy rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .preprocess import FeatureStats, one_hot_matrix, preprocess
from .splits import SplitTriple

HARD_GAP = 0.04


def fs_ratio(ds_or_n, d: int | None = None) -> float:
    """Raw feature count over sample count, in percent."""
    if d is None:
        n, d = ds_or_n.n, ds_or_n.d
    else:
        n = int(ds_or_n)
    if n < 1:
        raise ValueError("fs_ratio needs n >= 1")
    return 100.0 * d / n


def c_score_matrix(X: np.ndarray) -> float | None:
    """Mean |Pearson r| over column pairs i<j; constant columns count as r=0."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if d < 2:
        return None
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    live = norms > 0
    unit = np.zeros_like(centered)
    unit[:, live] = centered[:, live] / norms[live]
    corr = np.clip(np.abs(unit.T @ unit), 0.0, 1.0)
    iu = np.triu_indices(d, k=1)
    return float(corr[iu].mean())


def c_score(ds: Dataset) -> float | None:
    """C-score on the one-hot encoded, unstandardised matrix."""
    return c_score_matrix(one_hot_matrix(ds).X)


@dataclass(frozen=True)
class DatasetProfile:
    dataset_id: str
    n: int
    d: int
    n_categorical: int
    n_classes: int
    fs_ratio: float
    c_score: float | None
    difficulty: str | None = None
    lr_acc: float | None = None
    gbt_acc: float | None = None


def difficulty_label(gbt_acc: float, lr_acc: float) -> str:
    return "Hard" if gbt_acc - lr_acc >= HARD_GAP - 1e-12 else "Easy"


def classify_difficulty(ds: Dataset, splits: list[SplitTriple]) -> tuple[str, float, float]:
    """Mean test accuracy of tuned GBT and tuned LR over ``splits``; returns (label, lr_acc, gbt_acc)."""
    from ..baselines import fit_gbt, fit_logreg

    lr_accs, gbt_accs = [], []
    for sp in splits:
        stats = FeatureStats.from_rows(ds, sp.train)
        tr, va, te = (preprocess(ds, stats, rows) for rows in (sp.train, sp.val, sp.test))
        lr = fit_logreg(tr.X, tr.y, va.X, va.y, n_classes=ds.schema.n_classes)
        gbt = fit_gbt(tr.X, tr.y, va.X, va.y, n_classes=ds.schema.n_classes)
        lr_accs.append(float(np.mean(lr.predict(te.X) == te.y)))
        gbt_accs.append(float(np.mean(gbt.predict(te.X) == te.y)))
    lr_acc, gbt_acc = float(np.mean(lr_accs)), float(np.mean(gbt_accs))
    return difficulty_label(gbt_acc, lr_acc), lr_acc, gbt_acc


def profile(ds: Dataset, splits: list[SplitTriple] | None = None) -> DatasetProfile:
    label = lr_acc = gbt_acc = None
    if splits:
        label, lr_acc, gbt_acc = classify_difficulty(ds, splits)
    return DatasetProfile(
        dataset_id=ds.dataset_id,
        n=ds.n,
        d=ds.d,
        n_categorical=ds.schema.n_categorical,
        n_classes=ds.schema.n_classes,
        fs_ratio=fs_ratio(ds),
        c_score=c_score(ds),
        difficulty=label,
        lr_acc=lr_acc,
        gbt_acc=gbt_acc,
    )
