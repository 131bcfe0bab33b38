"""Central finite-difference gradient checks."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, no_grad


def numeric_grad(fn: Callable[[], Tensor], param: Tensor, step: float = 1e-5) -> np.ndarray:
    param.data = np.ascontiguousarray(param.data)
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = fn().item()
            flat[i] = orig - step
            down = fn().item()
            flat[i] = orig
            gflat[i] = (up - down) / (2 * step)
    return grad


# Central differences in float64 carry ~eps*|f|/h ~ 1e-11 of roundoff per entry,
# so gradients that are identically zero (e.g. attention key biases, which the
# softmax cancels) are compared against this floor instead of their own norm.
# At a 1e-4 threshold this amounts to an absolute tolerance of 1e-10.
NORM_FLOOR = 1e-6


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), NORM_FLOOR)
    return float(np.linalg.norm(analytic - numeric) / scale)


def check_gradients(fn: Callable[[], Tensor], params: Sequence[Tensor], step: float = 1e-5) -> float:
    """Largest relative error between backprop and finite differences over ``params``."""
    for p in params:
        p.grad = None
    loss = fn()
    loss.backward()
    worst = 0.0
    for p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        worst = max(worst, relative_error(analytic, numeric_grad(fn, p, step)))
    return worst
