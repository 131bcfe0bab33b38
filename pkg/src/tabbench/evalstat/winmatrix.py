"""Pairwise significant-win counts across datasets."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .ranking import ScoreRecord
from .wilcoxon import wilcoxon


@dataclass
class WinMatrix:
    methods: list[str]
    wins: np.ndarray
    totals: np.ndarray

    def index(self, method: str) -> int:
        return self.methods.index(method)

    def cell(self, row: str, col: str) -> str:
        i, j = self.index(row), self.index(col)
        if i == j:
            return ""
        return f"{self.wins[i, j]}/{self.totals[i, j]}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", *self.methods])
        for m in self.methods:
            w.writerow([m, *(self.cell(m, o) for o in self.methods)])
        return buf.getvalue()


def build_win_matrix(records: Iterable[ScoreRecord], alpha: float = 0.05, methods: list[str] | None = None) -> WinMatrix:
    """Row method earns a win over the column method on each dataset where the
    paired test is significant and its mean is strictly higher. Datasets where
    the test is significant but the means tie are left out of the total so that
    wins(A,B) + wins(B,A) always equals the total."""
    by_ds: dict[str, dict[str, ScoreRecord]] = {}
    order: list[str] = []
    for r in records:
        by_ds.setdefault(r.dataset_id, {})[r.method] = r
        if r.method not in order:
            order.append(r.method)
    methods = list(methods) if methods is not None else order
    m = len(methods)
    wins = np.zeros((m, m), dtype=np.int64)
    totals = np.zeros((m, m), dtype=np.int64)
    for ds_id, recs in by_ds.items():
        for i in range(m):
            for j in range(i + 1, m):
                a, b = recs.get(methods[i]), recs.get(methods[j])
                if a is None or b is None or a.oom or b.oom:
                    continue
                if len(a.scores) != len(b.scores):
                    raise ValueError(f"dataset {ds_id}: {methods[i]} and {methods[j]} have different split counts")
                res = wilcoxon(a.scores, b.scores, alpha)
                if not res.significant or a.mean == b.mean:
                    continue
                totals[i, j] += 1
                totals[j, i] += 1
                if a.mean > b.mean:
                    wins[i, j] += 1
                else:
                    wins[j, i] += 1
    return WinMatrix(methods, wins, totals)
