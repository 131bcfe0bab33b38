import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.linear_model import LogisticRegression
from sklearn.tree import DecisionTreeRegressor

from tabbench.baselines import (
    GbtModel,
    LogRegModel,
    build_tree,
    fit_gbt,
    fit_logreg,
    grid_points,
    train_gbt,
    train_logreg,
)
from tabbench.ndcore import load_checkpoint, save_checkpoint

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


def separable(rng, n=100):
    X = rng.normal(size=(n, 2))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    return X, y


def xor_cloud(rng, n=400):
    X = rng.uniform(-1, 1, size=(n, 2))
    return X, ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)


def ce(P, y):
    return -np.log(P[np.arange(len(y)), y]).mean()


def test_logreg_separable_training_accuracy():
    X, y = separable(np.random.default_rng(0))
    m = train_logreg(X, y, 0.001)
    assert np.mean(m.predict(X) == y) == 1.0


def test_logreg_single_class_rejected():
    with pytest.raises(ValueError):
        train_logreg(np.ones((5, 2)), np.zeros(5, int), 1.0)


def test_logreg_xor_at_most_three_quarters():
    for l2 in (0.001, 0.1, 10.0):
        m = train_logreg(XOR_X, XOR_Y, l2)
        assert np.mean(m.predict(XOR_X) == XOR_Y) <= 0.75


def test_logreg_matches_sklearn_optimum():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 4))
    y = rng.integers(0, 3, 200)
    for l2 in (0.1, 1.0, 10.0):
        ours = train_logreg(X, y, l2, tol=1e-9, max_iter=20000)
        # our penalty l2/(2n)||W||^2 on mean CE equals sklearn's C = 1/l2 on summed CE
        ref = LogisticRegression(C=1.0 / l2, tol=1e-12, max_iter=10000).fit(X, y)
        np.testing.assert_allclose(ours.predict_proba(X), ref.predict_proba(X), atol=1e-5)


def test_logreg_zero_weights_uniform():
    m = LogRegModel(np.zeros((3, 4)), np.zeros(4), 1.0)
    P = m.predict_proba(np.ones((2, 3)))
    np.testing.assert_allclose(P, 0.25)
    np.testing.assert_array_equal(m.predict(np.ones((2, 3))), 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-50, 50))
def test_logreg_argmax_shift_invariant(seed, c):
    rng = np.random.default_rng(seed)
    m = LogRegModel(rng.normal(size=(3, 4)), rng.normal(size=4), 1.0)
    X = rng.normal(size=(10, 3))
    shifted = LogRegModel(m.weights, m.bias + c, 1.0)
    np.testing.assert_array_equal(m.predict(X), shifted.predict(X))
    np.testing.assert_allclose(m.predict_proba(X).sum(1), 1.0, atol=1e-12)


def test_logreg_width_mismatch():
    m = LogRegModel(np.zeros((3, 2)), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        m.predict(np.ones((1, 4)))


def test_fit_logreg_grid_picks_a_grid_value():
    rng = np.random.default_rng(2)
    X, y = separable(rng, 150)
    m = fit_logreg(X[:100], y[:100], X[100:], y[100:])
    assert m.l2 in (0.001, 0.01, 0.1, 1.0, 10.0)


def test_gbt_depth_zero_predicts_prior():
    y = np.array([0, 0, 0, 1, 2, 2])
    X = np.arange(6.0)[:, None]
    m = train_gbt(X, y, n_rounds=1, max_depth=0, learning_rate=0.1)
    np.testing.assert_allclose(m.predict_proba(X), np.tile([0.5, 1 / 6, 1 / 3], (6, 1)), atol=1e-12)


def test_gbt_xor_depth_two():
    m = train_gbt(XOR_X, XOR_Y, n_rounds=50, max_depth=2, learning_rate=0.3)
    assert np.mean(m.predict(XOR_X) == XOR_Y) == 1.0


def test_gbt_pure_leaf_point_prefers_its_class():
    X, y = separable(np.random.default_rng(3), 60)
    m = train_gbt(X, y, n_rounds=20, max_depth=3, learning_rate=0.1)
    P = m.predict_proba(X)
    assert np.all(P[np.arange(len(y)), y] > P[np.arange(len(y)), 1 - y])


def test_gbt_training_ce_non_increasing():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(150, 3))
    y = rng.integers(0, 3, 150)
    m = train_gbt(X, y, n_rounds=40, max_depth=3, learning_rate=0.1)
    losses = [ce(np.exp(F) / np.exp(F).sum(1, keepdims=True), y) for F in m.staged_raw(X)]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_gbt_staged_equals_retrained():
    rng = np.random.default_rng(5)
    X, y = xor_cloud(rng, 120)
    long = train_gbt(X, y, 30, 2, 0.1)
    short = train_gbt(X, y, 12, 2, 0.1)
    np.testing.assert_array_equal(long.raw(X, 12), short.raw(X))
    np.testing.assert_array_equal(long.truncated(12).raw(X), short.raw(X))


def test_tree_structure_matches_sklearn_regressor():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(80, 4))
    r = rng.normal(size=80)
    order = np.argsort(X, axis=0, kind="stable").T.copy()
    ours = build_tree(X, r, order, 3, lambda rows: r[rows].mean())
    ref = DecisionTreeRegressor(max_depth=3, random_state=0).fit(X, r)
    np.testing.assert_allclose(ours.predict(X), ref.predict(X), atol=1e-12)


def test_gbt_beats_logreg_on_xor_cloud():
    rng = np.random.default_rng(7)
    X, y = xor_cloud(rng, 500)
    tr, va, te = slice(0, 350), slice(350, 400), slice(400, 500)
    lr = fit_logreg(X[tr], y[tr], X[va], y[va])
    gbt = fit_gbt(X[tr], y[tr], X[va], y[va])
    acc_lr = np.mean(lr.predict(X[te]) == y[te])
    acc_gbt = np.mean(gbt.predict(X[te]) == y[te])
    assert acc_gbt - acc_lr >= 0.04


def test_grid_order():
    pts = grid_points()
    assert len(pts) == 12
    assert pts[0] == {"max_depth": 2, "n_rounds": 100, "learning_rate": 0.05}
    assert pts[1] == {"max_depth": 2, "n_rounds": 100, "learning_rate": 0.1}


def test_fit_gbt_uses_grid_rounds():
    rng = np.random.default_rng(8)
    X, y = separable(rng, 80)
    grid = {"max_depth": (1,), "n_rounds": (3, 5), "learning_rate": (0.1,)}
    m = fit_gbt(X[:60], y[:60], X[60:], y[60:], grid=grid)
    assert m.n_rounds in (3, 5)


def test_gbt_width_mismatch():
    m = train_gbt(XOR_X, XOR_Y, 2, 1, 0.1)
    with pytest.raises(ValueError):
        m.predict(np.ones((1, 3)))


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    X, y = xor_cloud(rng, 60)
    gbt = train_gbt(X, y, 5, 2, 0.1)
    save_checkpoint(tmp_path / "g.npz", gbt.to_arrays(), kind="gbt")
    arrays, header = load_checkpoint(tmp_path / "g.npz", kind="gbt")
    np.testing.assert_array_equal(GbtModel.from_arrays(arrays).raw(X), gbt.raw(X))
    lr = train_logreg(X, y, 1.0)
    save_checkpoint(tmp_path / "l.npz", lr.to_arrays(), kind="logreg")
    np.testing.assert_array_equal(LogRegModel.from_arrays(load_checkpoint(tmp_path / "l.npz")[0]).predict(X), lr.predict(X))
