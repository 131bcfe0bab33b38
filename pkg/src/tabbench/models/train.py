"""Mini-batch Adam training with best-validation-loss checkpointing."""

from __future__ import annotations

import logging
from collections import OrderedDict
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..ndcore import Adam, Module, NonFiniteError, Tensor, cross_entropy, mse, no_grad

log = logging.getLogger(__name__)

BATCH_SIZE = 128
LEARNING_RATE = 1e-3


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss or update."""


@dataclass
class TrainResult:
    state: "OrderedDict[str, np.ndarray]"
    best_val_loss: float
    best_epoch: int
    val_history: list[float] = field(default_factory=list)


def minibatches(n: int, batch_size: int, rng: np.random.Generator, min_size: int = 1):
    """Shuffled index batches; the final short batch is kept (merged into the
    previous one only if it is smaller than ``min_size``)."""
    perm = rng.permutation(n)
    batches = [perm[i : i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) < min_size:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


def train_loop(
    module: Module,
    batch_loss: Callable[[np.ndarray, np.random.Generator], Tensor],
    val_loss: Callable[[int], float],
    n_train: int,
    epochs: int,
    rng: np.random.Generator,
    batch_size: int = BATCH_SIZE,
    lr: float = LEARNING_RATE,
    min_batch: int = 1,
    params: list | None = None,
) -> TrainResult:
    """Run ``epochs`` passes; validate before training (epoch 0) and after each
    epoch e; restore and return the parameters with the lowest validation loss
    (earliest on ties)."""
    params = module.parameters() if params is None else params
    opt = Adam(params, lr=lr)

    def validate(epoch):
        with no_grad():
            v = float(val_loss(epoch))
        if not np.isfinite(v):
            raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
        return v

    best = validate(0)
    best_state, best_epoch = module.state_dict(), 0
    history = [best]
    for epoch in range(1, epochs + 1):
        for idx in minibatches(n_train, batch_size, rng, min_batch):
            opt.zero_grad()
            try:
                loss = batch_loss(idx, rng)
                loss.backward()
                opt.step()
            except NonFiniteError as e:
                raise DivergenceError(f"epoch {epoch}: {e}") from e
        v = validate(epoch)
        history.append(v)
        if v < best:
            best, best_state, best_epoch = v, module.state_dict(), epoch
    module.load_state_dict(best_state)
    return TrainResult(best_state, best, best_epoch, history)


def chunked_mean(fn: Callable[[np.ndarray], float], n: int, batch_size: int) -> float:
    """Row-weighted mean of ``fn`` over consecutive index chunks."""
    total = 0.0
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(n, start + batch_size))
        total += fn(idx) * len(idx)
    return total / n


def logits(model: Module, X: np.ndarray, batch_size: int = BATCH_SIZE) -> np.ndarray:
    out = []
    with no_grad():
        for start in range(0, len(X), batch_size):
            out.append(model(Tensor(X[start : start + batch_size])).data)
    return np.concatenate(out, axis=0)


def predict(model: Module, X: np.ndarray, batch_size: int = BATCH_SIZE) -> np.ndarray:
    return logits(model, X, batch_size).argmax(axis=1)


def train_supervised(
    model: Module,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    epochs: int,
    rng: np.random.Generator,
    batch_size: int = BATCH_SIZE,
    lr: float = LEARNING_RATE,
    n_classes: int | None = None,
    params: list | None = None,
) -> TrainResult:
    y_train, y_val = np.asarray(y_train), np.asarray(y_val)
    if n_classes is not None and (y_train.max() >= n_classes or y_val.max() >= n_classes or min(y_train.min(), y_val.min()) < 0):
        raise ValueError("labels outside 0..C-1")

    def batch_loss(idx, _rng):
        return cross_entropy(model(Tensor(X_train[idx])), y_train[idx])

    def val_loss(_epoch):
        return chunked_mean(
            lambda idx: cross_entropy(model(Tensor(X_val[idx])), y_val[idx]).item(), len(X_val), batch_size
        )

    return train_loop(model, batch_loss, val_loss, len(X_train), epochs, rng, batch_size, lr, params=params)


def pretrain_autoencoder(
    ae: Module,
    X_train: np.ndarray,
    X_val: np.ndarray,
    epochs: int,
    rng: np.random.Generator,
    batch_size: int = BATCH_SIZE,
    lr: float = LEARNING_RATE,
) -> TrainResult:
    """MSE reconstruction training; ``ae.encoder`` holds the best encoder afterwards."""

    def batch_loss(idx, _rng):
        x = Tensor(X_train[idx])
        return mse(ae(x), x)

    def val_loss(_epoch):
        return chunked_mean(lambda idx: mse(ae(Tensor(X_val[idx])), Tensor(X_val[idx])).item(), len(X_val), batch_size)

    return train_loop(ae, batch_loss, val_loss, len(X_train), epochs, rng, batch_size, lr)
