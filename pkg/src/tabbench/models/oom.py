"""Analytic memory estimate used to turn would-be OOM crashes into records.

Estimated bytes = 8 * (4 * parameters + 3 * activations): each parameter
carries its value, gradient and two Adam moments; each activation is
counted for the forward value, its gradient, and one temporary.
"""

from __future__ import annotations

from dataclasses import dataclass

from .attention import AttentionStackSpec
from .mlp import DECODER, HEAD, TRUNK

DEFAULT_BUDGET_BYTES = 8 * 1024**3
BYTES_PER_VALUE = 8


@dataclass(frozen=True)
class MemoryVerdict:
    proceed: bool
    estimated_bytes: int
    budget_bytes: int

    @property
    def status(self) -> str:
        return "ok" if self.proceed else "OOM"


def _mlp_counts(widths, n):
    params = sum(a * b + b for a, b in zip(widths[:-1], widths[1:]))
    acts = n * sum(widths) * 2
    return params, acts


def _block_counts(width, tokens, batch, heads, ff_mult):
    """Parameters and activations of one attention block over (batch, tokens, width)."""
    params = 4 * (width * width + width) + 4 * width
    params += width * ff_mult * width + ff_mult * width + ff_mult * width * width + width
    acts = batch * heads * tokens * tokens  # attention probabilities
    acts += batch * tokens * width * (10 + 2 * ff_mult)
    return params, acts


def attention_counts(n: int, d: int, n_classes: int, spec: AttentionStackSpec) -> tuple[int, int]:
    t, k = d + 1, spec.k
    params = 2 * d * k + k + 2 * k + (k * k + k + k * n_classes + n_classes)
    acts = n * t * k * 2 + n * (2 * k + n_classes)
    for _ in range(spec.blocks):
        if spec.use_feature_attention:
            p, a = _block_counts(k, t, n, spec.heads, spec.ff_mult)
            params, acts = params + p, acts + a
        if spec.use_sample_attention:
            p, a = _block_counts(t * k, n, 1, spec.heads, spec.ff_mult)
            params, acts = params + p, acts + a
    return params, acts


def mlp_counts(n: int, d: int, n_classes: int, kind: str = "dnn") -> tuple[int, int]:
    if kind == "autoencoder":
        return _mlp_counts([d, *TRUNK, *DECODER, d], n)
    widths = [d, *TRUNK, *HEAD, n_classes]
    p, a = _mlp_counts(widths, n)
    if kind == "contrastive":
        # two views in the batch plus the projector
        p += TRUNK[-1] * TRUNK[-1] + TRUNK[-1]
        a *= 2
    return p, a


def estimate_bytes(params: int, activations: int) -> int:
    return BYTES_PER_VALUE * (4 * params + 3 * activations)


def oom_guard(estimated: int, budget: int = DEFAULT_BUDGET_BYTES) -> MemoryVerdict:
    return MemoryVerdict(estimated <= budget, int(estimated), int(budget))
