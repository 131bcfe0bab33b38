import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabbench.contrastive import (
    ContrastiveConfig,
    ContrastiveModel,
    brute_force_info_nce,
    build_pairs,
    finetune,
    info_nce,
    load_encoder,
    make_validation_replicas,
    pair_index,
    pretrain_contrastive,
    replica_for_epoch,
    save_encoder,
)
from tabbench.corrupt import CorruptionStrategy, Corruptor
from tabbench.models import ClassifierHead, Encoder, EncoderClassifier, Projector, predict
from tabbench.ndcore import Tensor, check_gradients
from tabbench.ndcore.checkpoint import CheckpointError


def identity(batch, rng):
    return np.array(batch, copy=True)


def candidate_set(index, a):
    return {(int(r), int(c)) for r, c, m in zip(index.cand_rows[a], index.cand_cols[a], index.cand_mask[a]) if m}


def test_scarf_pairs_two_samples():
    idx = pair_index(2, "scarf")
    assert idx.n_anchors == 2
    assert [tuple(p) for p in idx.pos] == [(0, 2), (1, 3)]
    assert candidate_set(idx, 0) == {(0, 2), (0, 3)}


def test_proposed_pairs_two_samples():
    idx = pair_index(2, "proposed")
    # x_1 = row 0, x_2 = row 1, corrupted views rows 2 and 3
    assert candidate_set(idx, 0) == {(0, 2), (0, 3), (0, 1), (2, 3)}
    assert candidate_set(idx, 1) == {(1, 2), (1, 3), (1, 0), (3, 2)}


def test_simclr_pairs_exclude_self():
    idx = pair_index(3, "simclr")
    assert idx.n_anchors == 6
    for a in range(6):
        cands = candidate_set(idx, a)
        assert (a, a) not in cands and len(cands) == 5
        assert tuple(idx.pos[a]) in cands


def test_build_pairs_simclr_with_pass_duplicates():
    x = np.random.default_rng(0).normal(size=(2, 3))
    pb = build_pairs(x, "simclr", identity, np.random.default_rng(1))
    np.testing.assert_array_equal(pb.views[:2], x)
    np.testing.assert_array_equal(pb.views[2:], x)


def test_build_pairs_rejects_single_sample():
    with pytest.raises(ValueError):
        build_pairs(np.ones((1, 3)), "scarf", identity, np.random.default_rng(0))


def test_unknown_scheme():
    with pytest.raises(ValueError):
        pair_index(3, "moco")


def test_simclr_single_pair_loss_zero():
    z = np.random.default_rng(0).normal(size=(2, 4))
    assert info_nce(Tensor(z), pair_index(1, "simclr")).item() == 0.0


def test_scalar_example():
    z = np.array([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    loss = info_nce(Tensor(z), pair_index(2, "scarf"), 1.0).item()
    assert loss == pytest.approx(-np.log(np.e / (np.e + np.exp(-1))), abs=1e-12)
    assert loss == pytest.approx(0.1269, abs=1e-4)


@pytest.mark.parametrize("scheme", ["simclr", "scarf", "proposed"])
def test_matches_brute_force(scheme):
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        z = rng.normal(size=(2 * n, int(rng.integers(1, 5))))
        tau = float(rng.uniform(0.1, 2))
        idx = pair_index(n, scheme)
        assert info_nce(Tensor(z), idx, tau).item() == pytest.approx(brute_force_info_nce(z, idx, tau), abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10**6))
def test_non_negative_and_proposed_dominates_scarf(n, seed):
    z = np.random.default_rng(seed).normal(size=(2 * n, 3))
    scarf = info_nce(Tensor(z), pair_index(n, "scarf")).item()
    prop = info_nce(Tensor(z), pair_index(n, "proposed")).item()
    assert scarf >= 0 and prop >= scarf


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6), st.floats(0.2, 5.0))
def test_temperature_scaling_identity(n, seed, c):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2 * n, 3))
    idx = pair_index(n, "proposed")
    S = np.array([[u @ v / np.linalg.norm(u) / np.linalg.norm(v) for v in z] for u in z]) / c
    pos = S[idx.pos[:, 0], idx.pos[:, 1]]
    cand = S[idx.cand_rows, idx.cand_cols]
    manual = np.mean(np.log(np.exp(cand).sum(1)) - pos)
    assert info_nce(Tensor(z), idx, c).item() == pytest.approx(manual, abs=1e-12)


def test_info_nce_gradients():
    rng = np.random.default_rng(3)
    z = Tensor(rng.normal(size=(6, 4)), requires_grad=True)
    for scheme in ("simclr", "scarf", "proposed"):
        assert check_gradients(lambda: info_nce(z, pair_index(3, scheme), 0.5), [z]) < 1e-4


def test_cyclic_replica_index():
    assert replica_for_epoch(13, 10) == 3
    assert replica_for_epoch(0, 10) == 0


def blobs(rng, n=60):
    a = rng.normal(size=(n, 4)) + np.array([3, 3, 0, 0])
    b = rng.normal(size=(n, 4)) - np.array([3, 3, 0, 0])
    X = np.vstack([a, b])
    y = np.repeat([0, 1], n)
    perm = rng.permutation(len(X))
    return X[perm], y[perm]


def small_model(d, rng):
    from tabbench.models import MlpSpec

    spec = MlpSpec(trunk=(16, 8), head=(8,))
    enc = Encoder(d, rng, spec)
    return ContrastiveModel(enc, Projector(enc.width, rng)), spec


def test_replicas_frozen_and_distinct():
    rng = np.random.default_rng(0)
    X, _ = blobs(rng, 20)
    c = Corruptor(CorruptionStrategy.named("rfc"), X, 2, rng)
    reps = make_validation_replicas(X[:10], "scarf", lambda b, r: c(b, r), 10, np.random.default_rng(0).bit_generator.seed_seq)
    assert len(reps) == 10
    assert not np.array_equal(reps[0].second, reps[1].second)
    with pytest.raises(ValueError):
        reps[0].second[0, 0] = 1.0


def test_zero_epochs_returns_initial_state():
    rng = np.random.default_rng(1)
    X, _ = blobs(rng, 20)
    model, _ = small_model(4, rng)
    before = model.state_dict()
    res, reps = pretrain_contrastive(model, X[:30], X[30:], ContrastiveConfig(epochs=0), rng)
    assert res.best_epoch == 0 and len(res.val_history) == 1
    for k, v in model.state_dict().items():
        np.testing.assert_array_equal(v, before[k])


@pytest.mark.parametrize("seed", range(5))
def test_pretraining_reduces_validation_loss(seed):
    rng = np.random.default_rng(seed)
    X, _ = blobs(rng, 60)
    model, _ = small_model(4, rng)
    cfg = ContrastiveConfig(epochs=100, scheme="scarf", strategy=CorruptionStrategy.named("rfc"), batch_size=32)
    res, _ = pretrain_contrastive(model, X[:90], X[90:], cfg, rng)
    assert res.best_val_loss < res.val_history[0]
    assert res.best_val_loss == min(res.val_history)


def test_frozen_random_encoder_separable_embeddings():
    rng = np.random.default_rng(2)
    X, y = blobs(rng, 60)
    model, spec = small_model(4, rng)
    head = ClassifierHead(model.encoder.width, 2, rng, spec)
    clf = EncoderClassifier(model.encoder, head)
    before = model.encoder.state_dict()
    finetune(clf, X[:90], y[:90], X[90:], y[90:], 100, rng, 2, batch_size=32, freeze=model.encoder)
    assert np.mean(predict(clf, X[90:]) == y[90:]) == 1.0
    for k, v in model.encoder.state_dict().items():
        np.testing.assert_array_equal(v, before[k])


def test_finetune_zero_epochs_and_label_check():
    rng = np.random.default_rng(3)
    X, y = blobs(rng, 10)
    model, spec = small_model(4, rng)
    clf = EncoderClassifier(model.encoder, ClassifierHead(model.encoder.width, 2, rng, spec))
    before = clf.state_dict()
    finetune(clf, X[:15], y[:15], X[15:], y[15:], 0, rng, 2)
    for k, v in clf.state_dict().items():
        np.testing.assert_array_equal(v, before[k])
    with pytest.raises(ValueError):
        finetune(clf, X[:15], y[:15] + 1, X[15:], y[15:], 1, rng, 2)


def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    model, _ = small_model(4, rng)
    save_encoder(tmp_path / "enc.npz", model, "contrastive-encoder", {"scheme": "proposed"})
    other, _ = small_model(4, np.random.default_rng(99))
    header = load_encoder(tmp_path / "enc.npz", other, "contrastive-encoder")
    assert header["meta"] == {"scheme": "proposed"} and header["version"] == 1
    for k, v in model.state_dict().items():
        np.testing.assert_array_equal(other.state_dict()[k], v)
    with pytest.raises(CheckpointError):
        load_encoder(tmp_path / "enc.npz", other, "gbt")


def test_config_validation():
    with pytest.raises(ValueError):
        ContrastiveConfig(temperature=0)
    with pytest.raises(ValueError):
        ContrastiveConfig(replicas=0)
