"""Experiment orchestration: datasets x methods x splits, append-only results, resumable manifest.

Output directory layout::

    <out>/manifest.json    config, config hash, code version, environment, trial index
    <out>/results.jsonl    one TrialResult record per line, appended after each trial
"""

from __future__ import annotations

import json
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .. import __version__
from ..datahub import DEFAULT_CACHE, Dataset, fetch_openml, load_csv, make_splits
from .config import ConfigError, ExperimentConfig, from_dict
from .trials import TrialResult, run_trial

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
RESULTS = "results.jsonl"


class RunError(RuntimeError):
    pass


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    environment: dict[str, str]
    config: dict[str, Any]
    trials: dict[str, int] = field(default_factory=dict)  # "dataset/method/split" -> line in results file
    expected: int = 0

    @property
    def complete(self) -> bool:
        return len(self.trials) >= self.expected

    def to_json(self) -> dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "environment": self.environment,
            "config": self.config,
            "expected_trials": self.expected,
            "complete": self.complete,
            "results": RESULTS,
            "trials": self.trials,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "RunManifest":
        return cls(
            doc["config_hash"],
            doc["code_version"],
            doc["environment"],
            doc["config"],
            dict(doc.get("trials", {})),
            int(doc.get("expected_trials", 0)),
        )


def trial_key(dataset_id: str, method: str, split: int) -> str:
    return f"{dataset_id}/{method}/{split}"


def environment() -> dict[str, str]:
    return {"python": platform.python_version(), "numpy": np.__version__, "platform": platform.platform()}


def resolve_dataset(ref: str, cache_dir: str | os.PathLike | None = None) -> Dataset:
    """An all-digit reference is an OpenML id; anything else is a CSV path with a YAML sidecar."""
    if str(ref).isdigit():
        return fetch_openml(int(ref), cache_dir or DEFAULT_CACHE)
    return load_csv(ref)


def read_results(path: str | os.PathLike) -> list[TrialResult]:
    """Complete records only; a torn final line (crash mid-write) is dropped from the file."""
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_bytes()
    keep = raw.rfind(b"\n") + 1
    if keep < len(raw):
        log.warning("%s: discarding a partial trailing record", path)
        with open(path, "r+b") as fh:
            fh.truncate(keep)
    return [TrialResult.from_record(json.loads(line)) for line in raw[:keep].decode().splitlines() if line.strip()]


def load_manifest(out: str | os.PathLike) -> RunManifest:
    path = Path(out) / MANIFEST
    if not path.is_file():
        raise FileNotFoundError(f"no manifest at {path}")
    return RunManifest.from_json(json.loads(path.read_text()))


def _write_manifest(out: Path, manifest: RunManifest) -> None:
    tmp = out / (MANIFEST + ".tmp")
    tmp.write_text(json.dumps(manifest.to_json(), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, out / MANIFEST)


def _append(fh, result: TrialResult) -> None:
    fh.write(json.dumps(result.to_record(), sort_keys=False) + "\n")
    fh.flush()
    os.fsync(fh.fileno())


def load_datasets(cfg: ExperimentConfig) -> dict[str, Dataset]:
    loaded, problems = {}, []
    for ref in cfg.datasets:
        try:
            ds = resolve_dataset(ref, cfg.cache_dir)
        except Exception as e:  # noqa: BLE001 - every failure is reported before any trial
            problems.append(f"dataset {ref}: {type(e).__name__}: {e}")
            continue
        if ds.dataset_id in loaded:
            problems.append(f"dataset {ref}: duplicate dataset id {ds.dataset_id}")
        loaded[ds.dataset_id] = ds
    if problems:
        raise ConfigError(problems)
    return loaded


def _trial_task(args):
    ds, split, method, cfg = args
    return run_trial(ds, split, method, cfg)


def run(
    cfg: ExperimentConfig,
    out: str | os.PathLike | None = None,
    on_result: Callable[[TrialResult], None] | None = None,
    stop_after: int | None = None,
) -> tuple[RunManifest, list[TrialResult]]:
    """Run every pending trial; resumes from whatever ``out`` already holds.

    ``stop_after`` ends the session after that many new trials (used to
    exercise interruption and resume).
    """
    out = Path(out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    datasets = load_datasets(cfg)

    if (out / MANIFEST).exists():
        manifest = load_manifest(out)
        if manifest.config_hash != cfg.trial_hash():
            raise RunError(f"{out} holds results of a different experiment (config hash mismatch)")
    else:
        manifest = RunManifest(cfg.trial_hash(), __version__, environment(), cfg.to_dict())

    results = read_results(out / RESULTS)
    manifest.trials = {trial_key(*r.key): i for i, r in enumerate(results)}
    tasks = []
    for ds_id, ds in datasets.items():
        for split in make_splits(ds, cfg.seed, cfg.splits):
            for method in cfg.methods:
                if trial_key(ds_id, method.id, split.split_id) not in manifest.trials:
                    tasks.append((ds, split, method, cfg))
    manifest.expected = len(datasets) * cfg.splits * len(cfg.methods)
    _write_manifest(out, manifest)
    if stop_after is not None:
        tasks = tasks[:stop_after]

    with open(out / RESULTS, "a") as fh:

        def record(res: TrialResult):
            _append(fh, res)
            manifest.trials[trial_key(*res.key)] = len(results)
            results.append(res)
            _write_manifest(out, manifest)
            if on_result is not None:
                on_result(res)

        if cfg.workers <= 1 or len(tasks) <= 1:
            for t in tasks:
                record(_trial_task(t))
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [pool.submit(_trial_task, t) for t in tasks]
                for fut in as_completed(futures):
                    record(fut.result())
    return manifest, results


def load_run(out: str | os.PathLike) -> tuple[RunManifest, ExperimentConfig, list[TrialResult]]:
    manifest = load_manifest(out)
    cfg = from_dict(manifest.config)
    return manifest, cfg, read_results(Path(out) / RESULTS)


def score_fields(results: list[TrialResult]) -> list[dict[str, Any]]:
    """Records sorted by trial key with wall-clock time removed; equal across deterministic re-runs."""
    recs = [r.to_record() for r in sorted(results, key=lambda r: r.key)]
    for rec in recs:
        rec.pop("seconds")
    return recs


def progress_printer(stream=sys.stderr) -> Callable[[TrialResult], None]:
    def show(r: TrialResult):
        score = f"f1={r.f1_weighted:.4f}" if r.status == "ok" else r.status
        print(f"[{r.dataset_id}] {r.method:8s} split {r.split:2d}  {score}  {r.seconds:.1f}s", file=stream, flush=True)

    return show
