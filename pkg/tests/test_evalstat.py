import itertools

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import f1_score

from reference_tables import DIFF_1485, F1_458, F1_1485, HARD_AVERAGE, HARD_RANKS, METHODS, RANKS_458
from tabbench.evalstat import (
    ScoreRecord,
    average_ranks,
    build_win_matrix,
    midranks,
    per_diff,
    rank_methods,
    signed_rank_exact_pvalue,
    weighted_f1,
    wilcoxon,
)


def enumerate_pvalue(diffs):
    """Two-sided p from every one of the 2**n sign assignments."""
    d = np.asarray([x for x in diffs if x != 0], dtype=float)
    n = len(d)
    if n == 0:
        return 1.0
    ranks = scipy.stats.rankdata(np.abs(d))
    observed = ranks[d > 0].sum()
    lower = upper = 0
    for signs in itertools.product((0, 1), repeat=n):
        w = ranks[np.array(signs, bool)].sum()
        lower += w <= observed + 1e-9
        upper += w >= observed - 1e-9
    return min(1.0, 2 * min(lower, upper) / 2**n)


def test_weighted_f1_examples():
    assert weighted_f1([0, 1, 2], [0, 1, 2]) == 1.0
    assert weighted_f1([0, 0, 1, 1], [0, 1, 1, 1]) == pytest.approx(0.7333333333, abs=1e-9)
    assert weighted_f1([0, 0, 1], [2, 2, 2], n_classes=3) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6), st.integers(1, 60))
def test_weighted_f1_matches_sklearn(seed, C, n):
    rng = np.random.default_rng(seed)
    yt, yp = rng.integers(0, C, n), rng.integers(0, C, n)
    ref = f1_score(yt, yp, average="weighted", labels=np.arange(C), zero_division=0)
    assert weighted_f1(yt, yp, C) == pytest.approx(ref, abs=1e-12)
    perm = rng.permutation(C)
    assert weighted_f1(perm[yt], perm[yp], C) == pytest.approx(weighted_f1(yt, yp, C), abs=1e-12)


def test_weighted_f1_empty():
    with pytest.raises(ValueError):
        weighted_f1([], [])


def test_rank_examples():
    assert list(rank_methods({"a": (0.9, 0), "b": (0.8, 0), "c": (0.7, 0)}).values()) == [1, 2, 3]
    assert list(rank_methods({"a": (0.9, 0.01), "b": (0.9, 0.02)}).values()) == [1, 2]
    assert list(rank_methods({"a": (0.9, 0.01), "b": (0.9, 0.01), "c": (0.8, 0.0)}).values()) == [1, 1, 3]
    assert rank_methods({"a": (0.5, 0.1), "b": None}) == {"a": 1, "b": None}
    with pytest.raises(ValueError):
        rank_methods({"a": None})


def test_rank_reproduces_stored_458_row():
    assert rank_methods(F1_458) == RANKS_458


def test_rank_decimals_option():
    s = {"a": (0.90004, 0.01), "b": (0.9, 0.01)}
    assert rank_methods(s) == {"a": 1, "b": 2}
    assert rank_methods(s, decimals=3) == {"a": 1, "b": 1}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 3)), min_size=2, max_size=10))
def test_rank_monotone(pairs):
    s = {f"m{i}": (m / 5, sd / 10) for i, (m, sd) in enumerate(pairs)}
    r = rank_methods(s)
    for a, b in itertools.permutations(s, 2):
        if s[a][0] > s[b][0]:
            assert r[a] < r[b]


def test_average_ranks_reproduce_hard_table():
    table = {ds: dict(zip(METHODS, row)) for ds, row in HARD_RANKS.items()}
    avg = average_ranks(table)
    for m, (mu, sd) in zip(METHODS, HARD_AVERAGE):
        assert round(avg[m][0], 2) == mu and round(avg[m][1], 2) == sd, m


def test_per_diff_examples():
    assert per_diff({"a": 0.7, "b": 0.7}) == 0.0
    assert per_diff({"a": 1.0, "b": 0.5}) == 50.0
    means = {m: (s[0] if s else None) for m, s in F1_1485.items()}
    assert per_diff(means, exclude={"LR", "TabNet"}) == pytest.approx(DIFF_1485, abs=0.01)
    with pytest.raises(ValueError):
        per_diff({"a": 0.0, "b": 0.0})


def test_wilcoxon_identical_is_degenerate():
    r = wilcoxon(np.ones(10), np.ones(10))
    assert r.degenerate and not r.significant and r.n_effective == 0


def test_wilcoxon_all_positive_six():
    r = wilcoxon(np.arange(1, 7, dtype=float), np.zeros(6))
    assert r.pvalue == pytest.approx(2 / 64, abs=1e-15) and r.significant
    assert r.statistic == 0.0


def test_midranks():
    np.testing.assert_array_equal(midranks(np.array([3.0, 1.0, 3.0, 2.0])), [3.5, 1, 3.5, 2])


@pytest.mark.parametrize("n", range(1, 13))
def test_exact_matches_enumeration_with_ties_and_zeros(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        # small integer grid forces tied magnitudes and zero differences
        d = rng.integers(-3, 4, size=n).astype(float)
        assert signed_rank_exact_pvalue(d) == pytest.approx(enumerate_pvalue(d), abs=1e-12)


def test_exact_prefix_of_thirty_pairs():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=30), rng.normal(size=30)
    d = (a - b)[:12]
    assert wilcoxon(a[:12], b[:12]).pvalue == pytest.approx(enumerate_pvalue(d), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(21, 60))
def test_normal_branch_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    a = np.round(rng.normal(size=n), 1)
    b = np.round(rng.normal(size=n), 1)
    d = a - b
    if np.count_nonzero(d) <= 20:
        return
    ours = wilcoxon(a, b)
    ref = scipy.stats.wilcoxon(a, b, zero_method="wilcox", correction=True, method="approx")
    assert ours.method == "normal"
    assert ours.pvalue == pytest.approx(ref.pvalue, abs=1e-10)
    assert ours.statistic == pytest.approx(ref.statistic)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(5, 30))
def test_wilcoxon_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n), rng.normal(size=n)
    assert wilcoxon(a, b).pvalue == wilcoxon(b, a).pvalue


def test_wilcoxon_length_mismatch():
    with pytest.raises(ValueError):
        wilcoxon(np.ones(3), np.ones(4))


def random_records(rng, n_methods=4, n_datasets=6, n_splits=30):
    recs = []
    for ds in range(n_datasets):
        base = rng.uniform(0.3, 0.8)
        for m in range(n_methods):
            if rng.random() < 0.1:
                recs.append(ScoreRecord(str(ds), f"m{m}", oom=True))
                continue
            shift = rng.normal(scale=0.03)
            s = np.clip(base + shift + rng.normal(scale=0.02, size=n_splits), 0, 1)
            recs.append(ScoreRecord(str(ds), f"m{m}", tuple(s)))
    return recs


def test_win_matrix_identical_methods():
    s = tuple(np.linspace(0.5, 0.8, 30))
    recs = [ScoreRecord(str(d), m, s) for d in range(3) for m in ("A", "B")]
    wm = build_win_matrix(recs)
    assert wm.cell("A", "B") == "0/0" and wm.cell("B", "A") == "0/0"


def test_win_matrix_worked_example():
    rng = np.random.default_rng(0)
    recs = []
    for ds in range(8):
        base = rng.uniform(0.5, 0.8, size=30)
        a = base + (0.05 if ds == 0 else -0.05) + rng.normal(scale=0.005, size=30)
        recs += [ScoreRecord(str(ds), "A", tuple(a)), ScoreRecord(str(ds), "B", tuple(base))]
    wm = build_win_matrix(recs)
    assert wm.cell("A", "B") == "1/8" and wm.cell("B", "A") == "7/8"
    assert wm.to_csv().splitlines()[1] == "A,,1/8"


def test_win_matrix_antisymmetry_random():
    rng = np.random.default_rng(42)
    for _ in range(100):
        wm = build_win_matrix(random_records(rng))
        np.testing.assert_array_equal(wm.wins + wm.wins.T, wm.totals)
        np.testing.assert_array_equal(wm.totals, wm.totals.T)
        assert np.all(np.diag(wm.totals) == 0)


def test_win_matrix_split_mismatch():
    recs = [ScoreRecord("d", "A", (0.5,) * 5), ScoreRecord("d", "B", (0.5,) * 6)]
    with pytest.raises(ValueError):
        build_win_matrix(recs)


def test_score_record_invariants():
    with pytest.raises(ValueError):
        ScoreRecord("d", "m", (0.5,), oom=True)
    with pytest.raises(ValueError):
        ScoreRecord("d", "m", (1.5,))


def test_score_record_json_roundtrip():
    for rec in (ScoreRecord("37", "GBT", (0.5, 0.75, 1.0)), ScoreRecord("4134", "NPT", oom=True)):
        assert ScoreRecord.from_json(rec.to_json()) == rec
