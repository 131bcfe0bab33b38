"""Checkpoint container shared by every trainable model.

A checkpoint is an uncompressed ``.npz`` archive. Each parameter is stored
under its dotted name with its own shape header (the npy format). One extra
entry, ``__meta__``, holds a UTF-8 JSON document with the format version, a
``kind`` tag naming the model family, and free-form metadata.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from typing import Any

import numpy as np

FORMAT_VERSION = 1
META_KEY = "__meta__"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str | os.PathLike, arrays: Mapping[str, np.ndarray], kind: str, meta: Mapping[str, Any] | None = None) -> None:
    if META_KEY in arrays:
        raise CheckpointError(f"{META_KEY!r} is reserved")
    doc = {"version": FORMAT_VERSION, "kind": kind, "meta": dict(meta or {})}
    payload = {k: np.asarray(v) for k, v in arrays.items()}
    payload[META_KEY] = np.frombuffer(json.dumps(doc, sort_keys=True).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path: str | os.PathLike, kind: str | None = None) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Return (arrays, header); ``kind`` if given must match the stored tag."""
    with np.load(path, allow_pickle=False) as z:
        if META_KEY not in z.files:
            raise CheckpointError(f"{path}: missing {META_KEY}")
        doc = json.loads(z[META_KEY].tobytes().decode())
        arrays = {k: z[k] for k in z.files if k != META_KEY}
    if doc.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    if kind is not None and doc.get("kind") != kind:
        raise CheckpointError(f"{path}: expected kind {kind!r}, found {doc.get('kind')!r}")
    return arrays, doc
