"""Two-sided Wilcoxon signed-rank test with average ranks for ties."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_MAX_N = 20
MIN_EFFECTIVE_N = 5


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    n_effective: int
    pvalue: float
    significant: bool
    degenerate: bool = False
    method: str = "exact"


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    values = np.asarray(values)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _signed_ranks(diffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0]
    return midranks(np.abs(d)), d > 0


def signed_rank_exact_pvalue(diffs) -> float:
    """Exact two-sided p over all 2**n sign flips of the non-zero differences.

    Average ranks are multiples of 1/2, so doubled ranks are integers and the
    null distribution of the positive-rank sum comes from a subset-sum count.
    """
    ranks, positive = _signed_ranks(diffs)
    n = len(ranks)
    if n == 0:
        return 1.0
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    observed = int(doubled[positive].sum())
    lower = sum(counts[: observed + 1])
    upper = sum(counts[observed:])
    tail = min(lower, upper)
    return min(1.0, float(2 * tail / 2**n))


def _normal_pvalue(ranks: np.ndarray, positive: np.ndarray) -> tuple[float, float]:
    n = len(ranks)
    r_plus = ranks[positive].sum()
    r_minus = ranks[~positive].sum()
    T = min(r_plus, r_minus)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= (tie_counts**3 - tie_counts).sum() / 48.0
    d = T - mean
    d -= 0.5 * np.sign(d)
    z = d / math.sqrt(var) if var > 0 else 0.0
    return float(T), min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def wilcoxon(a, b, alpha: float = 0.05) -> WilcoxonResult:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and of equal length")
    diffs = a - b
    ranks, positive = _signed_ranks(diffs)
    n = len(ranks)
    statistic = float(min(ranks[positive].sum(), ranks[~positive].sum())) if n else 0.0
    if n <= EXACT_MAX_N:
        p = signed_rank_exact_pvalue(diffs)
        method = "exact"
    else:
        statistic, p = _normal_pvalue(ranks, positive)
        method = "normal"
    degenerate = n < MIN_EFFECTIVE_N
    return WilcoxonResult(statistic, n, p, (p < alpha) and not degenerate, degenerate, method)
