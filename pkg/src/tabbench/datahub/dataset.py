"""Dataset containers and the CSV + YAML sidecar loader."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "?", "NA", "N/A", "NaN", "nan", "null", "None"})
KINDS = ("numeric", "categorical")


class SchemaError(ValueError):
    pass


def _category_key(value: str):
    try:
        return (0, float(value), value)
    except ValueError:
        return (1, 0.0, value)


def sorted_vocabulary(values) -> tuple[str, ...]:
    return tuple(sorted({str(v) for v in values}, key=_category_key))


@dataclass(frozen=True)
class Column:
    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class DatasetSchema:
    columns: tuple[Column, ...]
    target: Column

    @property
    def n_classes(self) -> int:
        return len(self.target.categories)

    @property
    def n_categorical(self) -> int:
        return sum(c.kind == "categorical" for c in self.columns)

    def to_sidecar(self, openml_id: int | None = None) -> dict[str, Any]:
        cols = []
        for c in (*self.columns, self.target):
            entry: dict[str, Any] = {"name": c.name, "kind": c.kind}
            if c.kind == "categorical":
                entry["categories"] = list(c.categories)
            cols.append(entry)
        doc: dict[str, Any] = {"columns": cols, "target": self.target.name}
        if openml_id is not None:
            doc["openml_id"] = int(openml_id)
        return doc


@dataclass
class Dataset:
    """Feature table (numeric columns as float64, categorical as str) plus string targets."""

    frame: pd.DataFrame
    target: np.ndarray
    schema: DatasetSchema
    dataset_id: str
    provenance: dict[str, Any] = field(default_factory=dict)
    dropped_rows: int = 0

    def __post_init__(self):
        if len(self.frame) < 1 or len(self.schema.columns) < 1:
            raise SchemaError("dataset needs at least one row and one feature column")
        if len(self.target) != len(self.frame):
            raise SchemaError("target length differs from feature rows")
        if self.schema.n_classes < 2:
            raise SchemaError(f"target {self.schema.target.name!r} has fewer than 2 observed classes")

    @property
    def n(self) -> int:
        return len(self.frame)

    @property
    def d(self) -> int:
        return len(self.schema.columns)

    @property
    def labels(self) -> np.ndarray:
        """Targets as class indices 0..C-1 following the sorted target vocabulary."""
        index = {c: i for i, c in enumerate(self.schema.target.categories)}
        return np.array([index[v] for v in self.target], dtype=np.int64)


def read_sidecar(path: str | os.PathLike) -> dict[str, Any]:
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or "columns" not in doc or "target" not in doc:
        raise SchemaError(f"{path}: sidecar must define 'columns' and 'target'")
    unknown = set(doc) - {"columns", "target", "openml_id"}
    if unknown:
        raise SchemaError(f"{path}: unknown sidecar keys {sorted(unknown)}")
    return doc


def write_sidecar(path: str | os.PathLike, schema: DatasetSchema, openml_id: int | None = None) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(schema.to_sidecar(openml_id), fh, sort_keys=False)


def default_sidecar(csv_path: Path) -> Path:
    for cand in (csv_path.with_suffix(".schema.yaml"), csv_path.with_suffix(".yaml"), csv_path.parent / "schema.yaml"):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no schema sidecar found next to {csv_path}")


def load_csv(path: str | os.PathLike, sidecar: str | os.PathLike | None = None, dataset_id: str | None = None) -> Dataset:
    """Load a headed CSV described by a sidecar; rows with missing cells are dropped."""
    path = Path(path)
    sidecar = Path(sidecar) if sidecar is not None else default_sidecar(path)
    doc = read_sidecar(sidecar)

    raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    raw.columns = [c.strip() for c in raw.columns]
    specs = doc["columns"]
    names = [c["name"] for c in specs]
    missing_cols = [n for n in names if n not in raw.columns]
    if missing_cols:
        raise SchemaError(f"sidecar columns not present in {path.name}: {missing_cols}")
    target_name = doc["target"]
    if target_name not in names:
        raise SchemaError(f"target {target_name!r} is not a declared column")
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in sidecar")

    table = raw[names].apply(lambda s: s.str.strip().str.strip("'\""))
    missing = table.isin(MISSING_TOKENS).any(axis=1)
    dropped = int(missing.sum())
    table = table.loc[~missing].reset_index(drop=True)
    if len(table) == 0:
        raise SchemaError(f"{path.name}: no complete rows remain after dropping missing cells")

    columns = []
    data = {}
    target_col = None
    for spec in specs:
        name, kind = spec["name"], spec.get("kind", "numeric")
        values = table[name]
        if kind == "numeric":
            if name == target_name:
                raise SchemaError("target column must be categorical")
            try:
                data[name] = pd.to_numeric(values).astype(np.float64)
            except ValueError as e:
                raise SchemaError(f"column {name!r}: non-numeric value ({e})") from e
            col = Column(name, "numeric")
        else:
            observed = sorted_vocabulary(values)
            declared = spec.get("categories")
            if declared is not None:
                vocab = sorted_vocabulary(declared)
                stray = set(observed) - set(vocab)
                if stray:
                    raise SchemaError(f"column {name!r}: values outside declared categories {sorted(stray)[:5]}")
            else:
                vocab = observed
            if name == target_name:
                # classes are what is actually observed
                vocab = observed
            col = Column(name, "categorical", vocab)
            data[name] = values.astype(str)
        if name == target_name:
            target_col = col
        else:
            columns.append(col)

    schema = DatasetSchema(tuple(columns), target_col)
    frame = pd.DataFrame({c.name: data[c.name] for c in columns})
    if dropped:
        log.info("%s: dropped %d rows with missing cells", path.name, dropped)
    ds_id = dataset_id or str(doc.get("openml_id", path.stem if path.name != "data.csv" else path.parent.name))
    return Dataset(
        frame=frame,
        target=data[target_name].to_numpy(),
        schema=schema,
        dataset_id=ds_id,
        provenance={"source": str(path.resolve())},
        dropped_rows=dropped,
    )
