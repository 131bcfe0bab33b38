"""Dense float64 tensors with define-by-run reverse-mode differentiation.

Every op builds a node that remembers its parents and a backward rule.
Calling :meth:`Tensor.backward` on a scalar linearises the reachable graph
into a :class:`Tape` (topological order), replays it in reverse and then
marks the tape consumed so the same graph cannot be differentiated twice.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class GraphError(RuntimeError):
    pass


_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    prev = grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def _check_finite(arr: np.ndarray, where: str) -> None:
    if not np.isfinite(arr).all():
        raise NonFiniteError(f"non-finite values produced by {where}")


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    # sum over axes that were broadcast to reach grad.shape
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "_op", "_consumed")

    def __init__(self, data, requires_grad: bool = False, *, _check: bool = True):
        arr = np.array(data, dtype=np.float64) if not isinstance(data, np.ndarray) else data
        if arr.dtype != np.float64:
            arr = arr.astype(np.float64)
        if _check:
            _check_finite(arr, "tensor construction")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None
        self._op = "leaf"
        self._consumed = False

    # -- basic properties -------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data, _check=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        rg = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self._op}{rg})"

    # -- differentiation --------------------------------------------------
    def backward(self) -> None:
        if self.data.size != 1:
            raise GraphError(f"backward() needs a scalar, got shape {self.shape}")
        if self._consumed:
            raise GraphError("graph already consumed by a previous backward(); re-run the forward pass")
        if self.is_leaf:
            raise GraphError("backward() called on a leaf: nothing was recorded")
        tape = Tape.from_output(self)
        tape.run(self)

    # -- operator sugar ---------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent: float):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return take(self, index)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)

    def relu(self):
        return relu(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)


@dataclass
class Tape:
    """Ops reachable from one output, inputs before consumers."""

    records: list[Tensor] = field(default_factory=list)
    consumed: bool = False

    @classmethod
    def from_output(cls, out: Tensor) -> "Tape":
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(out, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen or node.is_leaf:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if not p.is_leaf and id(p) not in seen:
                    stack.append((p, False))
        return cls(order)

    def run(self, out: Tensor) -> None:
        if self.consumed:
            raise GraphError("tape already consumed")
        grads: dict[int, np.ndarray] = {id(out): np.ones_like(out.data)}
        for node in reversed(self.records):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                if parent.is_leaf:
                    parent.grad = pg.copy() if parent.grad is None else parent.grad + pg
                else:
                    key = id(parent)
                    grads[key] = pg if key not in grads else grads[key] + pg
        for node in self.records:
            node._parents = ()
            node._backward = None
            node._consumed = True
        self.consumed = True


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data: np.ndarray, parents: tuple, backward, op: str) -> Tensor:
    _check_finite(data, op)
    out = Tensor(data, _check=False)
    if grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
        out._op = op
    return out


# -- elementwise arithmetic ------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data + b.data
    except ValueError as e:
        raise ShapeError(f"add: {a.shape} vs {b.shape}") from e
    return _result(data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)), "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data - b.data
    except ValueError as e:
        raise ShapeError(f"sub: {a.shape} vs {b.shape}") from e
    return _result(data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)), "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        data = a.data * b.data
    except ValueError as e:
        raise ShapeError(f"mul: {a.shape} vs {b.shape}") from e
    return _result(
        data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
        "mul",
    )


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if np.any(b.data == 0):
        raise NonFiniteError("div: division by zero")
    try:
        data = a.data / b.data
    except ValueError as e:
        raise ShapeError(f"div: {a.shape} vs {b.shape}") from e

    def backward(g):
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return _result(data, (a, b), backward, "div")


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _result(-a.data, (a,), lambda g: (-g,), "neg")


def power(a, exponent: float) -> Tensor:
    a = as_tensor(a)
    data = a.data**exponent
    return _result(data, (a,), lambda g: (g * exponent * a.data ** (exponent - 1),), "pow")


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data < 0):
        raise NonFiniteError("sqrt of negative input")
    data = np.sqrt(a.data)
    return _result(data, (a,), lambda g: (g * 0.5 / data,), "sqrt")


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return _result(a.data * mask, (a,), lambda g: (g * mask,), "relu")


def clamp_min(a, floor: float) -> Tensor:
    a = as_tensor(a)
    keep = a.data >= floor
    return _result(np.where(keep, a.data, floor), (a,), lambda g: (g * keep,), "clamp_min")


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        data = np.exp(a.data)
    return _result(data, (a,), lambda g: (g * data,), "exp")


def log(a) -> Tensor:
    a = as_tensor(a)
    if np.any(a.data <= 0):
        raise NonFiniteError("log of non-positive input")
    return _result(np.log(a.data), (a,), lambda g: (g / a.data,), "log")


# -- linear algebra --------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-d operands, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul: inner dims differ {a.shape} @ {b.shape}")
    try:
        data = a.data @ b.data
    except ValueError as e:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}") from e

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _result(data, (a, b), backward, "matmul")


# -- reductions ------------------------------------------------------------

def _norm_axis(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(ax % ndim for ax in axis)


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    axes = _norm_axis(axis, a.ndim)
    data = a.data.sum(axis=axes, keepdims=keepdims)

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(np.asarray(data, dtype=np.float64), (a,), backward, "sum")


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    axes = _norm_axis(axis, a.ndim)
    count = int(np.prod([a.shape[ax] for ax in axes])) if axes else 1
    return sum_(a, axis, keepdims) * (1.0 / count)


def amax_const(a: Tensor, axis=-1, keepdims=True) -> np.ndarray:
    """Detached max, used only as a shift constant for stable exponentials."""
    return a.data.max(axis=axis, keepdims=keepdims)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return _result(s, (a,), backward, "softmax")


def log_softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    sm = np.exp(out)

    def backward(g):
        return (g - sm * g.sum(axis=axis, keepdims=True),)

    return _result(out, (a,), backward, "log_softmax")


def l2_norm(a, axis: int = -1, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    nrm = np.sqrt((a.data * a.data).sum(axis=axis, keepdims=True))

    def backward(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        safe = np.where(nrm > 0, nrm, 1.0)
        return (g * np.where(nrm > 0, a.data / safe, 0.0),)

    data = nrm if keepdims else np.squeeze(nrm, axis=axis)
    return _result(data, (a,), backward, "l2_norm")


# -- shape manipulation ----------------------------------------------------

def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"cannot reshape {a.shape} to {shape}") from e
    return _result(data, (a,), lambda g: (g.reshape(a.shape),), "reshape")


def transpose(a, axes=None) -> Tensor:
    a = as_tensor(a)
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError(f"bad transpose axes {axes} for shape {a.shape}")
    inverse = tuple(np.argsort(axes))
    return _result(a.data.transpose(axes), (a,), lambda g: (g.transpose(inverse),), "transpose")


def swapaxes(a, ax1: int, ax2: int) -> Tensor:
    a = as_tensor(a)
    axes = list(range(a.ndim))
    axes[ax1], axes[ax2] = axes[ax2], axes[ax1]
    return transpose(a, tuple(axes))


def concatenate(tensors: Sequence, axis: int = 0) -> Tensor:
    ts = [as_tensor(t) for t in tensors]
    try:
        data = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concatenate: {[t.shape for t in ts]}") from e
    bounds = np.cumsum([t.shape[axis] for t in ts])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result(data, tuple(ts), backward, "concat")


def take(a, index) -> Tensor:
    """Basic or integer-array indexing; gradients scatter-add back."""
    a = as_tensor(a)
    if isinstance(index, Tensor):
        raise TypeError("index with numpy arrays or slices, not Tensors")
    try:
        data = a.data[index]
    except IndexError as e:
        raise ShapeError(str(e)) from e

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        return (full,)

    return _result(np.array(data, dtype=np.float64), (a,), backward, "take")


def broadcast_to(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        data = np.broadcast_to(a.data, shape).copy()
    except ValueError as e:
        raise ShapeError(f"cannot broadcast {a.shape} to {shape}") from e
    return _result(data, (a,), lambda g: (_unbroadcast(g, a.shape),), "broadcast")


# -- composite helpers -----------------------------------------------------

def cosine_similarity(a, b, axis: int = -1, eps: float = 1e-8) -> Tensor:
    """Cosine similarity of paired vectors along ``axis``."""
    a, b = as_tensor(a), as_tensor(b)
    dot = sum_(a * b, axis=axis)
    return dot / (clamp_min(l2_norm(a, axis), eps) * clamp_min(l2_norm(b, axis), eps))


def pairwise_cosine(a, b=None, eps: float = 1e-8) -> Tensor:
    """(m, p) x (q, p) -> (m, q) matrix of cosine similarities."""
    a = as_tensor(a)
    an = a / clamp_min(l2_norm(a, -1, keepdims=True), eps)
    if b is None:
        bn = an
    else:
        b = as_tensor(b)
        bn = b / clamp_min(l2_norm(b, -1, keepdims=True), eps)
    return an @ transpose(bn)


def mse(pred, target) -> Tensor:
    pred, target = as_tensor(pred), as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError(f"mse: {pred.shape} vs {target.shape}")
    diff = pred - target
    return mean(diff * diff)


def cross_entropy(logits, labels) -> Tensor:
    """Mean cross-entropy of (n, C) logits against integer labels."""
    logits = as_tensor(logits)
    labels = np.asarray(labels)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"cross_entropy: logits {logits.shape}, labels {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise ValueError("label out of range for logits")
    logp = log_softmax(logits, axis=-1)
    picked = take(logp, (np.arange(labels.size), labels.astype(np.int64)))
    return -mean(picked)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    mu = mean(x, axis=-1, keepdims=True)
    centered = x - mu
    var = mean(centered * centered, axis=-1, keepdims=True)
    return centered / sqrt(var + eps) * gamma + beta
