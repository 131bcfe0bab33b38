"""One (dataset, method, split) trial: preprocess, train, evaluate."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..baselines import GBT_GRID, L2_GRID, fit_gbt, fit_logreg
from ..contrastive import ContrastiveConfig, ContrastiveModel, finetune, pretrain_contrastive
from ..corrupt import CorruptionStrategy
from ..datahub import Dataset, FeatureStats, SplitTriple, preprocess, stable_hash
from ..evalstat import accuracy, weighted_f1
from ..models import (
    AttentionClassifier,
    AttentionStackSpec,
    Autoencoder,
    ClassifierHead,
    DivergenceError,
    Encoder,
    EncoderClassifier,
    Projector,
    attention_counts,
    dnn,
    estimate_bytes,
    mlp_counts,
    oom_guard,
    predict,
    pretrain_autoencoder,
    train_supervised,
)
from .config import ExperimentConfig, MethodConfig, family

STATUSES = ("ok", "OOM", "diverged")


@dataclass(frozen=True)
class TrialResult:
    dataset_id: str
    method: str
    split: int
    status: str
    seconds: float
    seed: int
    f1_weighted: float | None = None
    accuracy: float | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")
        if self.status != "ok" and (self.f1_weighted is not None or self.accuracy is not None):
            raise ValueError("non-ok trials carry no scores")

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.dataset_id, self.method, self.split)

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"dataset_id": self.dataset_id, "method": self.method, "split": self.split}
        if self.status == "ok":
            rec["f1_weighted"] = self.f1_weighted
            rec["accuracy"] = self.accuracy
        rec.update(status=self.status, seconds=self.seconds, seed=self.seed)
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "TrialResult":
        return cls(
            dataset_id=str(rec["dataset_id"]),
            method=str(rec["method"]),
            split=int(rec["split"]),
            status=rec["status"],
            seconds=float(rec["seconds"]),
            seed=int(rec["seed"]),
            f1_weighted=rec.get("f1_weighted"),
            accuracy=rec.get("accuracy"),
        )


def trial_seed(seed: int, dataset_id: str, method: str, split: int) -> int:
    """Independent stream per trial, so results do not depend on execution order."""
    return stable_hash(seed, dataset_id, method, split)


def _attention_spec(preset: str, params: dict) -> AttentionStackSpec:
    return AttentionStackSpec.preset(preset, **{k: params[k] for k in ("k", "heads", "blocks", "ff_mult") if k in params})


def _contrastive_config(method: MethodConfig, cfg: ExperimentConfig) -> ContrastiveConfig:
    p = method.params
    name = "saint" if method.id == "saint" else method.id
    strategy = CorruptionStrategy.named(name, p.get("rate"), p.get("lam", 0.5))
    return ContrastiveConfig(
        temperature=float(p.get("temperature", 1.0)),
        scheme=p.get("scheme", "proposed"),
        strategy=strategy,
        epochs=cfg.epochs.pretrain,
        replicas=int(p.get("replicas", 10)),
        batch_size=cfg.batch_size,
        lr=cfg.learning_rate,
    )


def memory_estimate(method: MethodConfig, d: int, n_classes: int, batch_size: int) -> int | None:
    """Estimated peak bytes of one training step, or None for the tree/linear baselines."""
    fam = family(method.id)
    if fam == "baseline":
        return None
    if fam in ("attention", "saint"):
        p, a = attention_counts(batch_size, d, n_classes, _attention_spec(method.id, method.params))
        if fam == "saint":
            a *= 2  # two views per contrastive step
        return estimate_bytes(p, a)
    kind = {"supervised": "dnn", "autoencoder": "autoencoder", "contrastive": "contrastive"}[fam]
    return estimate_bytes(*mlp_counts(batch_size, d, n_classes, kind))


def fit_and_predict(method: MethodConfig, cfg: ExperimentConfig, tr, va, te, n_classes: int, rng) -> np.ndarray:
    fam = family(method.id)
    ep, bs, lr = cfg.epochs, cfg.batch_size, cfg.learning_rate
    d = tr.X.shape[1]
    if fam == "baseline":
        if method.id == "lr":
            model = fit_logreg(tr.X, tr.y, va.X, va.y, n_classes, tuple(method.params.get("grid", L2_GRID)))
        else:
            grid = {k: tuple(v) for k, v in method.params.get("grid", GBT_GRID).items()}
            model = fit_gbt(tr.X, tr.y, va.X, va.y, n_classes, grid)
        return model.predict(te.X)
    if fam == "supervised":
        model = dnn(d, n_classes, rng)
        train_supervised(model, tr.X, tr.y, va.X, va.y, ep.supervised, rng, bs, lr, n_classes)
    elif fam == "attention":
        model = AttentionClassifier(d, n_classes, _attention_spec(method.id, method.params), rng)
        train_supervised(model, tr.X, tr.y, va.X, va.y, ep.supervised, rng, bs, lr, n_classes)
    elif fam == "autoencoder":
        ae = Autoencoder(d, rng)
        pretrain_autoencoder(ae, tr.X, va.X, ep.pretrain, rng, bs, lr)
        model = EncoderClassifier(ae.encoder, ClassifierHead(ae.encoder.width, n_classes, rng))
        finetune(model, tr.X, tr.y, va.X, va.y, ep.finetune, rng, n_classes, bs, lr)
    elif fam == "contrastive":
        enc = Encoder(d, rng)
        cm = ContrastiveModel(enc, Projector(enc.width, rng))
        pretrain_contrastive(cm, tr.X, va.X, _contrastive_config(method, cfg), rng, n_classes)
        model = EncoderClassifier(enc, ClassifierHead(enc.width, n_classes, rng))
        finetune(model, tr.X, tr.y, va.X, va.y, ep.finetune, rng, n_classes, bs, lr)
    elif fam == "saint":
        model = AttentionClassifier(d, n_classes, _attention_spec("saint", method.params), rng)
        cm = ContrastiveModel(model.encoder, Projector(model.encoder.width, rng))
        pretrain_contrastive(cm, tr.X, va.X, _contrastive_config(method, cfg), rng, n_classes)
        finetune(model, tr.X, tr.y, va.X, va.y, ep.finetune, rng, n_classes, bs, lr)
    else:  # pragma: no cover - registry and dispatch are kept in sync
        raise ValueError(f"no trainer for family {fam!r}")
    return predict(model, te.X, bs)


def run_trial(ds: Dataset, split: SplitTriple, method: MethodConfig, cfg: ExperimentConfig) -> TrialResult:
    seed = trial_seed(cfg.seed, ds.dataset_id, method.id, split.split_id)
    start = time.perf_counter()

    def done(status, f1=None, acc=None):
        return TrialResult(ds.dataset_id, method.id, split.split_id, status, time.perf_counter() - start, seed, f1, acc)

    stats = FeatureStats.from_rows(ds, split.train)
    tr, va, te = (preprocess(ds, stats, rows) for rows in (split.train, split.val, split.test))
    n_classes = ds.schema.n_classes
    est = memory_estimate(method, tr.X.shape[1], n_classes, cfg.batch_size)
    if est is not None and not oom_guard(est, cfg.budget_bytes).proceed:
        return done("OOM")
    rng = np.random.default_rng(seed)
    try:
        pred = fit_and_predict(method, cfg, tr, va, te, n_classes, rng)
    except MemoryError:
        return done("OOM")
    except DivergenceError:
        return done("diverged")
    return done("ok", weighted_f1(te.y, pred, n_classes), accuracy(te.y, pred))
