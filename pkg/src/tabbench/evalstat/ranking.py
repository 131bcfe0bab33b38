"""Per-dataset method ranking, average ranks and PerDiff."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

Summary = tuple[float, float]


@dataclass(frozen=True)
class ScoreRecord:
    dataset_id: str
    method: str
    scores: tuple[float, ...] = ()
    oom: bool = False

    def __post_init__(self):
        if self.oom and self.scores:
            raise ValueError("an OOM record carries no scores")
        if any(not 0.0 <= s <= 1.0 for s in self.scores):
            raise ValueError("scores must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))

    @property
    def std(self) -> float:
        return float(np.std(self.scores, ddof=1)) if len(self.scores) > 1 else 0.0

    def summary(self) -> Summary | None:
        return None if self.oom or not self.scores else (self.mean, self.std)

    def to_json(self) -> str:
        """One line: dataset_id, method, per-split scores, oom flag."""
        return json.dumps({"dataset_id": self.dataset_id, "method": self.method, "scores": list(self.scores), "oom": self.oom})

    @classmethod
    def from_json(cls, line: str) -> "ScoreRecord":
        d = json.loads(line)
        return cls(str(d["dataset_id"]), str(d["method"]), tuple(float(x) for x in d["scores"]), bool(d["oom"]))


def rank_methods(summaries: Mapping[str, Summary | None], decimals: int | None = None) -> dict[str, int | None]:
    """Rank by mean descending, then std ascending; exact ties share a rank and skip the next.

    ``None`` summaries (OOM) stay unranked. ``decimals`` compares values as
    they would be printed.
    """
    keys = {}
    for method, s in summaries.items():
        if s is None:
            continue
        mean, std = s
        if decimals is not None:
            mean, std = round(mean, decimals), round(std, decimals)
        keys[method] = (-mean, std)
    if not keys:
        raise ValueError("no rankable (non-OOM) methods")
    ranks: dict[str, int | None] = {}
    for method in summaries:
        if method in keys:
            ranks[method] = 1 + sum(other < keys[method] for other in keys.values())
        else:
            ranks[method] = None
    return ranks


def average_ranks(table: Mapping[str, Mapping[str, int | None]]) -> dict[str, Summary]:
    """Mean and sample standard deviation of each method's ranks over datasets where it was ranked."""
    collected: dict[str, list[int]] = {}
    for ranks in table.values():
        for method, r in ranks.items():
            collected.setdefault(method, [])
            if r is not None:
                collected[method].append(r)
    out = {}
    for method, rs in collected.items():
        if not rs:
            out[method] = (float("nan"), float("nan"))
            continue
        arr = np.asarray(rs, dtype=np.float64)
        out[method] = (float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0)
    return out


def per_diff(means: Mapping[str, float | None], exclude=()) -> float:
    """100 * (max - min) / max over the included, non-OOM methods."""
    vals = [m for k, m in means.items() if k not in set(exclude) and m is not None]
    if len(vals) < 2:
        raise ValueError("PerDiff needs at least two included methods")
    hi, lo = max(vals), min(vals)
    if hi == 0:
        raise ValueError("PerDiff undefined when the best mean is 0")
    return 100.0 * (hi - lo) / hi
