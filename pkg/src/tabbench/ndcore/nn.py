"""Parameter containers and the small layers shared by every model."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from . import tensor as T
from .tensor import Tensor


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> Tensor:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    shape = shape or (fan_in, fan_out)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros(*shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


class Module:
    """Walks attributes in definition order to find parameters and children."""

    def named_parameters(self, prefix: str = ""):
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(full + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")
                    elif isinstance(item, Tensor) and item.requires_grad:
                        yield f"{full}.{i}", item

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((k, p.data.copy()) for k, p in self.named_parameters())

    def load_state_dict(self, state) -> None:
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        extra = set(state) - set(own)
        if missing or extra:
            raise KeyError(f"state mismatch: missing={sorted(missing)} unexpected={sorted(extra)}")
        for k, p in own.items():
            arr = np.asarray(state[k], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(f"{k}: shape {arr.shape} != {p.data.shape}")
            p.data = arr.copy()

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.weight = xavier_uniform(rng, n_in, n_out)
        self.bias = zeros(n_out)

    def forward(self, x):
        return x @ self.weight + self.bias


class LayerNorm(Module):
    def __init__(self, width: int):
        self.gamma = Tensor(np.ones(width), requires_grad=True)
        self.beta = zeros(width)

    def forward(self, x):
        return T.layer_norm(x, self.gamma, self.beta)


class MLP(Module):
    """Linear layers with ReLU between them; ``final_activation`` adds one after the last."""

    def __init__(self, widths, rng: np.random.Generator, final_activation: bool = False):
        widths = list(widths)
        if len(widths) < 2:
            raise ValueError("an MLP needs at least input and output widths")
        self.widths = tuple(widths)
        self.final_activation = final_activation
        self.layers = [Linear(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]

    def forward(self, x):
        h = x
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            h = layer(h)
            if i < last or self.final_activation:
                h = T.relu(h)
        return h
