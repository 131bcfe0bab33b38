"""Binary masks selecting which cells of a batch get corrupted."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MASK_KINDS = ("fixed", "bernoulli", "none")


@dataclass(frozen=True)
class MaskSpec:
    kind: str = "fixed"
    rate: float = 0.6

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ValueError(f"mask kind must be one of {MASK_KINDS}, got {self.kind!r}")
        if self.kind != "none" and not 0.0 < self.rate <= 1.0:
            raise ValueError(f"mask rate must lie in (0, 1], got {self.rate}")

    @classmethod
    def fixed_fraction(cls, fraction: float = 0.6) -> "MaskSpec":
        return cls("fixed", fraction)

    @classmethod
    def bernoulli(cls, p: float = 0.3) -> "MaskSpec":
        return cls("bernoulli", p)

    @classmethod
    def none(cls) -> "MaskSpec":
        return cls("none", 0.0)


def masked_count(fraction: float, d: int) -> int:
    return math.floor(fraction * d + 0.5)


def gen_mask(shape: tuple[int, int], spec: MaskSpec, rng: np.random.Generator) -> np.ndarray:
    """Boolean (b, d) mask drawn from ``rng`` according to ``spec``."""
    b, d = shape
    if b < 1 or d < 1:
        raise ValueError(f"mask shape must be positive, got {shape}")
    if spec.kind == "none":
        return np.zeros((b, d), dtype=bool)
    if spec.kind == "bernoulli":
        return rng.random((b, d)) < spec.rate
    k = masked_count(spec.rate, d)
    if k == 0:
        raise ValueError(f"fraction {spec.rate} of {d} columns rounds to zero masked cells")
    order = np.argsort(rng.random((b, d)), axis=1)
    mask = np.zeros((b, d), dtype=bool)
    np.put_along_axis(mask, order[:, :k], True, axis=1)
    return mask
