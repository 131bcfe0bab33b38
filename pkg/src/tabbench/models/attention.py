"""Feature tokenizer, between-feature and between-sample self-attention, CLS classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ndcore import MLP, LayerNorm, Linear, Module, ShapeError, Tensor
from ..ndcore import tensor as T

PRESETS = {
    "ftt": dict(use_feature_attention=True, use_sample_attention=False, use_contrastive_pretraining=False),
    "npt": dict(use_feature_attention=True, use_sample_attention=True, use_contrastive_pretraining=False),
    "saint": dict(use_feature_attention=True, use_sample_attention=True, use_contrastive_pretraining=True),
}


@dataclass(frozen=True)
class AttentionStackSpec:
    k: int = 16
    heads: int = 4
    blocks: int = 2
    use_feature_attention: bool = True
    use_sample_attention: bool = False
    use_contrastive_pretraining: bool = False
    ff_mult: int = 2

    def __post_init__(self):
        if self.k % self.heads:
            raise ValueError(f"embedding width {self.k} not divisible by {self.heads} heads")
        if self.blocks < 0 or self.k < 1 or self.heads < 1:
            raise ValueError("k, heads must be positive and blocks non-negative")

    @classmethod
    def preset(cls, name: str, **overrides) -> "AttentionStackSpec":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return cls(**{**PRESETS[name], **overrides})


class FeatureTokenizer(Module):
    """Scalar feature j -> x_j * w_j + b_j in R^k; a learned CLS token sits at position 0."""

    def __init__(self, d: int, k: int, rng: np.random.Generator):
        bound = np.sqrt(6.0 / (1 + k))
        self.weight = Tensor(rng.uniform(-bound, bound, (d, k)), requires_grad=True)
        self.bias = Tensor(np.zeros((d, k)), requires_grad=True)
        self.cls = Tensor(rng.uniform(-bound, bound, (1, 1, k)), requires_grad=True)
        self.d, self.k = d, k

    def forward(self, x) -> Tensor:
        x = T.as_tensor(x)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeError(f"tokenizer expects (n, {self.d}), got {x.shape}")
        n = x.shape[0]
        tokens = x.reshape(n, self.d, 1) * self.weight + self.bias
        cls = T.broadcast_to(self.cls, (n, 1, self.k))
        return T.concatenate([cls, tokens], axis=1)


class MultiHeadSelfAttention(Module):
    def __init__(self, width: int, heads: int, rng: np.random.Generator):
        if width % heads:
            raise ValueError(f"width {width} not divisible by {heads} heads")
        self.heads = heads
        self.q = Linear(width, width, rng)
        self.k = Linear(width, width, rng)
        self.v = Linear(width, width, rng)
        self.o = Linear(width, width, rng)

    def forward(self, x: Tensor) -> Tensor:
        """Self-attention over axis 1 of a (batch, tokens, width) tensor."""
        if x.ndim != 3:
            raise ShapeError(f"attention expects (batch, tokens, width), got {x.shape}")
        B, S, W = x.shape
        h, dh = self.heads, W // self.heads

        def split(t):
            return T.swapaxes(t.reshape(B, S, h, dh), 1, 2)

        q, k, v = split(self.q(x)), split(self.k(x)), split(self.v(x))
        scores = (q @ T.swapaxes(k, 2, 3)) * (1.0 / np.sqrt(dh))
        ctx = T.softmax(scores, axis=-1) @ v
        return self.o(T.swapaxes(ctx, 1, 2).reshape(B, S, W))


class AttentionBlock(Module):
    """Pre-norm transformer block: x + MHSA(LN x), then x + FF(LN x)."""

    def __init__(self, width: int, heads: int, rng: np.random.Generator, ff_mult: int = 2):
        self.norm1 = LayerNorm(width)
        self.attn = MultiHeadSelfAttention(width, heads, rng)
        self.norm2 = LayerNorm(width)
        self.ff = MLP([width, ff_mult * width, width], rng)

    def forward(self, x):
        x = x + self.attn(self.norm1(x))
        return x + self.ff(self.norm2(x))


class FeatureAttention(AttentionBlock):
    """Attention among the d+1 tokens of each row independently."""


class SampleAttention(Module):
    """Attention among the rows of a batch: (n, d+1, k) -> (1, n, (d+1)k) -> back."""

    def __init__(self, tokens: int, k: int, heads: int, rng: np.random.Generator, ff_mult: int = 2):
        self.block = AttentionBlock(tokens * k, heads, rng, ff_mult)

    def forward(self, S):
        n, t, k = S.shape
        return self.block(S.reshape(1, n, t * k)).reshape(n, t, k)


def mhsa_features(S: Tensor, block: AttentionBlock) -> Tensor:
    return block(S)


def mhsa_samples(S: Tensor, block: SampleAttention) -> Tensor:
    return block(S)


class AttentionEncoder(Module):
    """Tokenizer plus L blocks; returns the CLS embedding of each row."""

    def __init__(self, d: int, spec: AttentionStackSpec, rng: np.random.Generator):
        self.spec = spec
        self.tokenizer = FeatureTokenizer(d, spec.k, rng)
        self.feature_blocks = []
        self.sample_blocks = []
        for _ in range(spec.blocks):
            if spec.use_feature_attention:
                self.feature_blocks.append(FeatureAttention(spec.k, spec.heads, rng, spec.ff_mult))
            if spec.use_sample_attention:
                self.sample_blocks.append(SampleAttention(d + 1, spec.k, spec.heads, rng, spec.ff_mult))
        self.norm = LayerNorm(spec.k)

    @property
    def width(self) -> int:
        return self.spec.k

    def tokens(self, x) -> Tensor:
        S = self.tokenizer(x)
        for i in range(self.spec.blocks):
            if self.spec.use_feature_attention:
                S = self.feature_blocks[i](S)
            if self.spec.use_sample_attention:
                S = self.sample_blocks[i](S)
        return S

    def forward(self, x) -> Tensor:
        S = self.tokens(x)
        return self.norm(S[:, 0, :])


class AttentionClassifier(Module):
    def __init__(self, d: int, n_classes: int, spec: AttentionStackSpec, rng: np.random.Generator):
        self.encoder = AttentionEncoder(d, spec, rng)
        self.head = MLP([spec.k, spec.k, n_classes], rng)

    def forward(self, x):
        return self.head(self.encoder(x))


def attention_forward(x, model: AttentionClassifier) -> Tensor:
    return model(x)
