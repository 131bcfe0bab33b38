"""Declarative experiment configuration (YAML) and the method registry."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..contrastive.pairs import SCHEMES
from ..models.oom import DEFAULT_BUDGET_BYTES


class ConfigError(ValueError):
    """Raised with every problem found, before any trial starts."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid config:\n  " + "\n  ".join(self.problems))


# method id -> (family, display name, allowed hyperparameters)
CONTRASTIVE_KEYS = ("scheme", "temperature", "rate", "lam", "replicas")
ATTENTION_KEYS = ("k", "heads", "blocks", "ff_mult")
METHODS: dict[str, tuple[str, str, tuple[str, ...]]] = {
    "lr": ("baseline", "LR", ("grid",)),
    "gbt": ("baseline", "GBT", ("grid",)),
    "dnn": ("supervised", "DNN", ()),
    "dnn_ae": ("autoencoder", "DNN-AE", ()),
    "ftt": ("attention", "FTT", ATTENTION_KEYS),
    "npt": ("attention", "NPT", ATTENTION_KEYS),
    "saint": ("saint", "SAINT", ATTENTION_KEYS + CONTRASTIVE_KEYS),
    **{
        name: ("contrastive", display, CONTRASTIVE_KEYS)
        for name, display in [
            ("pass", "Pass"),
            ("noise", "Noise"),
            ("sample", "Sample"),
            ("cutmix", "CutMix"),
            ("rfc", "RFC"),
            ("wcr", "WCR"),
            ("zero", "Zero"),
            ("mixup", "MixUp"),
        ]
    },
}


def family(method: str) -> str:
    return METHODS[method][0]


def display_name(method: str) -> str:
    return METHODS[method][1] if method in METHODS else method


@dataclass(frozen=True)
class MethodConfig:
    id: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class EpochBudget:
    supervised: int = 1000
    pretrain: int = 1000
    finetune: int = 200


@dataclass(frozen=True)
class ReportConfig:
    diff_exclude: tuple[str, ...] = ()
    groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    decimals: int = 3
    alpha: float = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...]
    methods: tuple[MethodConfig, ...]
    seed: int = 0
    splits: int = 30
    epochs: EpochBudget = EpochBudget()
    batch_size: int = 128
    learning_rate: float = 1e-3
    budget_mb: int = DEFAULT_BUDGET_BYTES // 2**20
    out: str = "results"
    cache_dir: str | None = None
    workers: int = 1
    report: ReportConfig = ReportConfig()

    @property
    def budget_bytes(self) -> int:
        return int(self.budget_mb) * 2**20

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["datasets"] = list(self.datasets)
        d["methods"] = [{"id": m.id, **m.params} for m in self.methods]
        d["report"] = {
            "diff_exclude": list(self.report.diff_exclude),
            "groups": {k: list(v) for k, v in self.report.groups.items()},
            "decimals": self.report.decimals,
            "alpha": self.report.alpha,
        }
        return d

    def trial_hash(self) -> str:
        """Hash of the fields that determine trial outcomes (not paths, workers or report layout)."""
        d = self.to_dict()
        for k in ("out", "cache_dir", "workers", "report"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


TOP_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}
EPOCH_KEYS = set(EpochBudget.__dataclass_fields__)
REPORT_KEYS = set(ReportConfig.__dataclass_fields__)


def _positive_int(problems, where, value, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, int) or value < (0 if allow_zero else 1):
        problems.append(f"{where}: expected a {'non-negative' if allow_zero else 'positive'} integer, got {value!r}")
        return False
    return True


def _method(entry, problems, i) -> MethodConfig | None:
    if isinstance(entry, str):
        entry = {"id": entry}
    if not isinstance(entry, dict) or "id" not in entry:
        problems.append(f"methods[{i}]: expected a method id or a mapping with 'id'")
        return None
    mid = str(entry["id"])
    if mid not in METHODS:
        problems.append(f"methods[{i}]: unknown method {mid!r}; registered: {', '.join(METHODS)}")
        return None
    params = {k: v for k, v in entry.items() if k != "id"}
    allowed = METHODS[mid][2]
    for k in params:
        if k not in allowed:
            problems.append(f"methods[{i}] ({mid}): unknown hyperparameter {k!r}; allowed: {list(allowed) or 'none'}")
    if "scheme" in params and params["scheme"] not in SCHEMES:
        problems.append(f"methods[{i}] ({mid}): scheme must be one of {SCHEMES}")
    if "temperature" in params and not (isinstance(params["temperature"], (int, float)) and params["temperature"] > 0):
        problems.append(f"methods[{i}] ({mid}): temperature must be positive")
    if "rate" in params and not (isinstance(params["rate"], (int, float)) and 0 < params["rate"] <= 1):
        problems.append(f"methods[{i}] ({mid}): rate must lie in (0, 1]")
    if "grid" in params and not (isinstance(params["grid"], (list, dict)) and params["grid"]):
        problems.append(f"methods[{i}] ({mid}): grid must be a non-empty list or mapping")
    return MethodConfig(mid, params)


def parse_config(doc: Any, base_dir: str | os.PathLike | None = None) -> ExperimentConfig:
    """Validate a config tree; collects all problems before raising."""
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be a mapping"])
    for k in doc:
        if k not in TOP_KEYS:
            problems.append(f"unknown key {k!r}")
    datasets = doc.get("datasets")
    if not isinstance(datasets, list) or not datasets:
        problems.append("datasets: expected a non-empty list of OpenML ids or CSV paths")
        datasets = []
    refs = []
    for ref in datasets:
        ref = str(ref)
        if not ref.isdigit() and base_dir is not None and not os.path.isabs(ref):
            ref = str(Path(base_dir) / ref)
        refs.append(ref)
    methods_doc = doc.get("methods")
    if not isinstance(methods_doc, list) or not methods_doc:
        problems.append("methods: expected a non-empty list")
        methods_doc = []
    methods = [m for i, e in enumerate(methods_doc) if (m := _method(e, problems, i)) is not None]
    ids = [m.id for m in methods]
    if len(set(ids)) != len(ids):
        problems.append("methods: duplicate method ids")

    kw: dict[str, Any] = {}
    for key in ("seed", "splits", "batch_size", "budget_mb", "workers"):
        if key in doc:
            if key == "seed":
                ok = isinstance(doc[key], int) and not isinstance(doc[key], bool) and doc[key] >= 0
                if not ok:
                    problems.append(f"seed: expected a non-negative integer, got {doc[key]!r}")
            else:
                ok = _positive_int(problems, key, doc[key])
            if ok:
                kw[key] = doc[key]
    if "learning_rate" in doc:
        lr = doc["learning_rate"]
        if isinstance(lr, (int, float)) and not isinstance(lr, bool) and lr > 0:
            kw["learning_rate"] = float(lr)
        else:
            problems.append(f"learning_rate: expected a positive number, got {lr!r}")
    for key in ("out", "cache_dir"):
        if key in doc and doc[key] is not None:
            kw[key] = str(doc[key])
    if "epochs" in doc:
        ep = doc["epochs"]
        if not isinstance(ep, dict):
            problems.append("epochs: expected a mapping with supervised/pretrain/finetune")
        else:
            for k in ep:
                if k not in EPOCH_KEYS:
                    problems.append(f"epochs: unknown key {k!r}")
            good = {k: v for k, v in ep.items() if k in EPOCH_KEYS and _positive_int(problems, f"epochs.{k}", v, True)}
            kw["epochs"] = EpochBudget(**good)
    if "report" in doc:
        rep = doc["report"]
        if not isinstance(rep, dict):
            problems.append("report: expected a mapping")
        else:
            for k in rep:
                if k not in REPORT_KEYS:
                    problems.append(f"report: unknown key {k!r}")
            groups = rep.get("groups", {}) or {}
            if not isinstance(groups, dict):
                problems.append("report.groups: expected a mapping of group name to dataset ids")
                groups = {}
            kw["report"] = ReportConfig(
                diff_exclude=tuple(str(m) for m in rep.get("diff_exclude", ()) or ()),
                groups={str(g): tuple(str(x) for x in v) for g, v in groups.items()},
                decimals=int(rep.get("decimals", 3)),
                alpha=float(rep.get("alpha", 0.05)),
            )
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(datasets=tuple(refs), methods=tuple(methods), **kw)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError([f"{path}: YAML parse error: {e}"]) from e
    return parse_config(doc, base_dir=path.parent)


def from_dict(d: dict[str, Any]) -> ExperimentConfig:
    """Inverse of ``ExperimentConfig.to_dict`` (paths are already resolved)."""
    return parse_config(d)


__all__ = [
    "ConfigError",
    "EpochBudget",
    "ExperimentConfig",
    "METHODS",
    "MethodConfig",
    "ReportConfig",
    "display_name",
    "family",
    "from_dict",
    "load_config",
    "parse_config",
]
