"""Train-split statistics and the numeric encoding every learner consumes."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureStats:
    """Per-column mean and population standard deviation."""

    names: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.std == 0

    @classmethod
    def from_rows(cls, ds: Dataset, rows=None) -> "FeatureStats":
        """Statistics of the numeric columns of ``ds`` restricted to ``rows`` (the training split)."""
        names = tuple(c.name for c in ds.schema.columns if c.kind == "numeric")
        frame = ds.frame if rows is None else ds.frame.iloc[np.asarray(rows)]
        if names:
            values = frame[list(names)].to_numpy(dtype=np.float64)
        else:
            values = np.zeros((len(frame), 0))
        return cls.of_matrix(values, names)

    @classmethod
    def of_matrix(cls, matrix: np.ndarray, names=None) -> "FeatureStats":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[0] == 0:
            raise ValueError("cannot compute statistics of zero rows")
        names = tuple(names) if names is not None else tuple(str(i) for i in range(matrix.shape[1]))
        return cls(names, matrix.mean(axis=0), matrix.std(axis=0))


@dataclass
class Encoded:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    unseen_categories: int = 0


def encoded_names(ds: Dataset) -> list[str]:
    names = []
    for col in ds.schema.columns:
        if col.kind == "numeric":
            names.append(col.name)
        else:
            names.extend(f"{col.name}={v}" for v in col.categories)
    return names


def one_hot_matrix(ds: Dataset, rows=None, standardize: FeatureStats | None = None) -> Encoded:
    frame = ds.frame if rows is None else ds.frame.iloc[np.asarray(rows)]
    target = ds.labels if rows is None else ds.labels[np.asarray(rows)]
    blocks = []
    unseen = 0
    stat_index = {n: i for i, n in enumerate(standardize.names)} if standardize is not None else {}
    for col in ds.schema.columns:
        values = frame[col.name].to_numpy()
        if col.kind == "numeric":
            v = values.astype(np.float64)
            if standardize is not None:
                i = stat_index[col.name]
                mu, sd = standardize.mean[i], standardize.std[i]
                v = np.zeros_like(v) if sd == 0 else (v - mu) / sd
            blocks.append(v[:, None])
        else:
            index = {c: j for j, c in enumerate(col.categories)}
            block = np.zeros((len(values), len(col.categories)))
            for r, v in enumerate(values):
                j = index.get(str(v))
                if j is None:
                    unseen += 1
                else:
                    block[r, j] = 1.0
            blocks.append(block)
    X = np.hstack(blocks) if blocks else np.zeros((len(frame), 0))
    if unseen:
        log.warning("%s: %d unseen categorical values encoded as all-zeros", ds.dataset_id, unseen)
    return Encoded(X, target, encoded_names(ds), unseen)


def preprocess(ds: Dataset, stats: FeatureStats, rows=None) -> Encoded:
    """Standardise numeric columns with train statistics, one-hot categoricals, index targets."""
    return one_hot_matrix(ds, rows, standardize=stats)
