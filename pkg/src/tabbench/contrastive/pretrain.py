"""Self-supervised pretraining with cyclic frozen validation replicas, then finetuning."""

from __future__ import annotations

import os
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..corrupt import CorruptionStrategy, Corruptor
from ..models.train import BATCH_SIZE, LEARNING_RATE, TrainResult, chunked_mean, train_loop, train_supervised
from ..ndcore import Module, Tensor, concatenate, load_checkpoint, save_checkpoint
from .loss import info_nce
from .pairs import SCHEMES, PairIndex, pair_index

CorruptFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class ContrastiveConfig:
    temperature: float = 1.0
    scheme: str = "proposed"
    strategy: CorruptionStrategy = field(default_factory=lambda: CorruptionStrategy.named("rfc"))
    epochs: int = 1000
    replicas: int = 10
    batch_size: int = BATCH_SIZE
    lr: float = LEARNING_RATE

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.replicas < 1:
            raise ValueError("need at least one validation replica")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")


class ContrastiveModel(Module):
    """Encoder plus projector; embeds each view matrix with its own forward pass."""

    def __init__(self, encoder: Module, projector: Module):
        self.encoder = encoder
        self.projector = projector

    def forward(self, x):
        return self.projector(self.encoder(x))

    def embed_views(self, first: np.ndarray, second: np.ndarray) -> Tensor:
        return concatenate([self(Tensor(first)), self(Tensor(second))], axis=0)


def replica_for_epoch(epoch: int, replicas: int) -> int:
    return epoch % replicas


@dataclass(frozen=True)
class ValidationReplica:
    first: np.ndarray
    second: np.ndarray


def make_validation_replicas(
    X_val: np.ndarray, scheme: str, corrupt: CorruptFn, count: int, seed_seq: np.random.SeedSequence
) -> list[ValidationReplica]:
    """Corrupt the validation set ``count`` times up front; replicas are read-only afterwards."""
    out = []
    for child in seed_seq.spawn(count):
        rng = np.random.default_rng(child)
        if scheme == "simclr":
            first, second = corrupt(X_val, rng), corrupt(X_val, rng)
        else:
            first, second = X_val, corrupt(X_val, rng)
        first, second = np.array(first), np.array(second)
        first.flags.writeable = False
        second.flags.writeable = False
        out.append(ValidationReplica(first, second))
    return out


def _chunks(n: int, size: int) -> list[np.ndarray]:
    """Consecutive chunks; a trailing singleton joins the previous chunk (a pair needs two rows)."""
    chunks = [np.arange(s, min(n, s + size)) for s in range(0, n, size)]
    if len(chunks) > 1 and len(chunks[-1]) < 2:
        tail = chunks.pop()
        chunks[-1] = np.concatenate([chunks[-1], tail])
    return chunks


def replica_loss(model: ContrastiveModel, rep: ValidationReplica, cfg: ContrastiveConfig) -> float:
    total, anchors = 0.0, 0
    for idx in _chunks(len(rep.first), cfg.batch_size):
        index = pair_index(len(idx), cfg.scheme)
        z = model.embed_views(rep.first[idx], rep.second[idx])
        total += info_nce(z, index, cfg.temperature).item() * index.n_anchors
        anchors += index.n_anchors
    return total / anchors


def pretrain_contrastive(
    model: ContrastiveModel,
    X_train: np.ndarray,
    X_val: np.ndarray,
    cfg: ContrastiveConfig,
    rng: np.random.Generator,
    n_classes: int = 2,
    corruptor: Corruptor | None = None,
) -> tuple[TrainResult, list[ValidationReplica]]:
    """Train encoder+projector on InfoNCE; keep the state with the lowest
    validation loss. Epoch 0 (initial state) and every epoch e validate on
    replica e mod R."""
    if len(X_train) < 2 or len(X_val) < 2:
        raise ValueError("contrastive pretraining needs at least two training and two validation rows")
    corruptor = corruptor or Corruptor(cfg.strategy, X_train, n_classes, rng)
    seeds = np.random.SeedSequence(int(rng.integers(2**63)))
    replicas = make_validation_replicas(X_val, cfg.scheme, lambda b, r: corruptor(b, r), cfg.replicas, seeds)

    def batch_loss(idx, brng):
        x = X_train[idx]
        if cfg.scheme == "simclr":
            first, second = corruptor(x, brng, rows=idx), corruptor(x, brng, rows=idx)
        else:
            first, second = x, corruptor(x, brng, rows=idx)
        return info_nce(model.embed_views(first, second), pair_index(len(idx), cfg.scheme), cfg.temperature)

    def val_loss(epoch):
        return replica_loss(model, replicas[replica_for_epoch(epoch, cfg.replicas)], cfg)

    result = train_loop(model, batch_loss, val_loss, len(X_train), cfg.epochs, rng, cfg.batch_size, cfg.lr, min_batch=2)
    return result, replicas


def finetune(
    classifier: Module,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    epochs: int,
    rng: np.random.Generator,
    n_classes: int,
    batch_size: int = BATCH_SIZE,
    lr: float = LEARNING_RATE,
    freeze: Module | None = None,
) -> TrainResult:
    """Supervised training of encoder + head; parameters of ``freeze`` stay fixed."""
    frozen = {id(p) for p in freeze.parameters()} if freeze is not None else set()
    trainable = [p for p in classifier.parameters() if id(p) not in frozen]
    return train_supervised(
        classifier, X_train, y_train, X_val, y_val, epochs, rng, batch_size, lr, n_classes=n_classes, params=trainable
    )


def save_encoder(path: str | os.PathLike, module: Module, kind: str, meta: dict | None = None) -> None:
    save_checkpoint(path, module.state_dict(), kind, meta)


def load_encoder(path: str | os.PathLike, module: Module, kind: str) -> dict:
    arrays, header = load_checkpoint(path, kind)
    module.load_state_dict(arrays)
    return header
