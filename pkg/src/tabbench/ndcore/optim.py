"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import NonFiniteError, Tensor


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


class Adam:
    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params: list[Tensor] = list(params)
        self.state = AdamState(
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            m=[np.zeros_like(p.data) for p in self.params],
            v=[np.zeros_like(p.data) for p in self.params],
        )

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        adam_step(self.params, self.state)


def adam_step(params: list[Tensor], state: AdamState) -> None:
    """One Adam update in place. Every parameter must carry a gradient."""
    if len(state.m) != len(params):
        raise ValueError("Adam state does not match the parameter list")
    for i, p in enumerate(params):
        if p.grad is None:
            raise ValueError(f"parameter {i} {p.shape} has no gradient; call backward() first")
        if p.grad.shape != p.data.shape or state.m[i].shape != p.data.shape:
            raise ValueError(f"parameter {i}: gradient/moment shape mismatch")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    updates = []
    for i, p in enumerate(params):
        g = p.grad
        m = b1 * state.m[i] + (1.0 - b1) * g
        v = b2 * state.v[i] + (1.0 - b2) * g * g
        delta = state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        if not np.isfinite(delta).all():
            raise NonFiniteError(f"non-finite Adam update for parameter {i}")
        updates.append((m, v, delta))
    for i, (p, (m, v, delta)) in enumerate(zip(params, updates)):
        state.m[i] = m
        state.v[i] = v
        p.data = p.data - delta
    state.step = t
