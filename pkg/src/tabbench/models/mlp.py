"""Fully connected networks: DNN classifier, autoencoder, contrastive encoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ndcore import MLP, Linear, Module

TRUNK = (256, 128, 64, 32)
HEAD = (32,)
DECODER = (64, 128, 256)


@dataclass(frozen=True)
class MlpSpec:
    trunk: tuple[int, ...] = TRUNK
    head: tuple[int, ...] = HEAD
    decoder: tuple[int, ...] = DECODER


class Encoder(Module):
    """input-256-128-64-32 with ReLU after every layer."""

    def __init__(self, d: int, rng: np.random.Generator, spec: MlpSpec = MlpSpec()):
        self.net = MLP([d, *spec.trunk], rng, final_activation=True)

    @property
    def width(self) -> int:
        return self.net.widths[-1]

    def forward(self, x):
        return self.net(x)


class ClassifierHead(Module):
    def __init__(self, width: int, n_classes: int, rng: np.random.Generator, spec: MlpSpec = MlpSpec()):
        self.net = MLP([width, *spec.head, n_classes], rng)

    def forward(self, h):
        return self.net(h)


class EncoderClassifier(Module):
    """Any embedding module followed by a classifier head."""

    def __init__(self, encoder: Module, head: Module):
        self.encoder = encoder
        self.head = head

    def forward(self, x):
        return self.head(self.encoder(x))


def dnn(d: int, n_classes: int, rng: np.random.Generator, spec: MlpSpec = MlpSpec()) -> EncoderClassifier:
    """input-256-128-64-32-32-output."""
    enc = Encoder(d, rng, spec)
    return EncoderClassifier(enc, ClassifierHead(enc.width, n_classes, rng, spec))


class Autoencoder(Module):
    """input-256-128-64-32-64-128-256-input; the reconstruction layer is linear."""

    def __init__(self, d: int, rng: np.random.Generator, spec: MlpSpec = MlpSpec()):
        self.encoder = Encoder(d, rng, spec)
        self.decoder = MLP([spec.trunk[-1], *spec.decoder, d], rng)

    def forward(self, x):
        return self.decoder(self.encoder(x))


class Projector(Module):
    def __init__(self, width: int, rng: np.random.Generator, out: int | None = None):
        self.proj = Linear(width, out or width, rng)

    def forward(self, h):
        return self.proj(h)
