"""OpenML download into a checksummed local cache.

Cache layout::

    <cache_dir>/<openml_id>/data.csv      normalised CSV (declared columns only)
    <cache_dir>/<openml_id>/schema.yaml   sidecar: columns, target, openml_id
    <cache_dir>/<openml_id>/data.sha256   hex digest of data.csv
    <cache_dir>/<openml_id>/source.json   download URLs and retrieval time
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import shutil
import tempfile
import urllib.error
import urllib.request
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import pandas as pd
import yaml

from .dataset import Dataset, load_csv, sorted_vocabulary

API_ROOT = "https://www.openml.org/api/v1/json"
CSV_ROOT = "https://www.openml.org/data/get_csv"
DEFAULT_CACHE = Path(os.environ.get("TABBENCH_CACHE", Path.home() / ".cache" / "tabbench" / "openml"))

HttpGet = Callable[[str], bytes]


class DatasetUnavailable(RuntimeError):
    """Download failed and nothing usable is cached."""


class DatasetNotFound(LookupError):
    pass


class ChecksumMismatch(RuntimeError):
    pass


def _urllib_get(url: str, timeout: float = 60.0) -> bytes:
    req = urllib.request.Request(url, headers={"User-Agent": "tabbench/0.1"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def cache_entry(cache_dir: str | os.PathLike, dataset_id: int) -> Path:
    return Path(cache_dir) / str(int(dataset_id))


def load_cached(cache_dir: str | os.PathLike, dataset_id: int) -> Dataset | None:
    entry = cache_entry(cache_dir, dataset_id)
    csv, sidecar, digest = entry / "data.csv", entry / "schema.yaml", entry / "data.sha256"
    if not (csv.exists() and sidecar.exists() and digest.exists()):
        return None
    expected = digest.read_text().split()[0].strip()
    actual = sha256_file(csv)
    if actual != expected:
        raise ChecksumMismatch(f"cached OpenML {dataset_id}: sha256 {actual} != recorded {expected}")
    ds = load_csv(csv, sidecar, dataset_id=str(int(dataset_id)))
    source = entry / "source.json"
    if source.exists():
        ds.provenance.update(json.loads(source.read_text()))
    return ds


def _features_to_schema(features: list[dict], target: str) -> tuple[list[dict], str]:
    specs = []
    for f in features:
        if str(f.get("is_ignore", "false")).lower() == "true":
            continue
        if str(f.get("is_row_identifier", "false")).lower() == "true":
            continue
        kind = "categorical" if f.get("data_type") == "nominal" else "numeric"
        if f.get("data_type") == "string":
            continue
        spec = {"name": f["name"], "kind": kind}
        if kind == "categorical" and f.get("nominal_value") is not None:
            vals = f["nominal_value"]
            spec["categories"] = list(sorted_vocabulary(vals if isinstance(vals, list) else [vals]))
        specs.append(spec)
    if target is None or target not in {s["name"] for s in specs}:
        raise DatasetNotFound(f"default target {target!r} not among usable features")
    for s in specs:
        if s["name"] == target:
            s["kind"] = "categorical"
            s.pop("categories", None)
    return specs, target


def download_to_cache(dataset_id: int, cache_dir: str | os.PathLike, http_get: HttpGet | None = None) -> Path:
    http_get = http_get or _urllib_get
    did = int(dataset_id)
    desc_url = f"{API_ROOT}/data/{did}"
    feat_url = f"{API_ROOT}/data/features/{did}"
    try:
        desc = json.loads(http_get(desc_url))["data_set_description"]
        features = json.loads(http_get(feat_url))["data_features"]["feature"]
        csv_url = f"{CSV_ROOT}/{desc['file_id']}"
        csv_bytes = http_get(csv_url)
    except urllib.error.HTTPError as e:
        if e.code in (404, 412):
            raise DatasetNotFound(f"OpenML dataset {did} not found") from e
        raise DatasetUnavailable(f"OpenML {did}: HTTP {e.code}") from e
    except (urllib.error.URLError, OSError, TimeoutError) as e:
        raise DatasetUnavailable(f"OpenML {did}: network failure ({e})") from e
    except KeyError as e:
        raise DatasetNotFound(f"OpenML {did}: malformed API response (missing {e})") from e

    target = desc.get("default_target_attribute")
    if target and "," in target:
        target = target.split(",")[0]
    specs, target = _features_to_schema(features, target)

    table = pd.read_csv(io.BytesIO(csv_bytes), dtype=str, keep_default_na=False, quotechar='"')
    table.columns = [c.strip().strip("'\"") for c in table.columns]
    names = [s["name"] for s in specs]
    absent = [n for n in names if n not in table.columns]
    if absent:
        raise DatasetNotFound(f"OpenML {did}: CSV lacks declared columns {absent[:5]}")
    table = table[names].apply(lambda s: s.str.strip().str.strip("'\""))

    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    final = cache_entry(cache_dir, did)
    tmp = Path(tempfile.mkdtemp(prefix=f".{did}-", dir=cache_dir))
    try:
        table.to_csv(tmp / "data.csv", index=False)
        sidecar = {"columns": specs, "target": target, "openml_id": did}
        with open(tmp / "schema.yaml", "w") as fh:
            yaml.safe_dump(sidecar, fh, sort_keys=False)
        (tmp / "data.sha256").write_text(sha256_file(tmp / "data.csv") + "\n")
        (tmp / "source.json").write_text(
            json.dumps(
                {
                    "source": f"openml:{did}",
                    "url": csv_url,
                    "name": desc.get("name"),
                    "retrieved": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                },
                indent=2,
            )
        )
        try:
            os.replace(tmp, final)
        except OSError:
            # another process won the race; its copy is equivalent
            shutil.rmtree(tmp, ignore_errors=True)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final


def fetch_openml(dataset_id: int, cache_dir: str | os.PathLike = DEFAULT_CACHE, http_get: HttpGet | None = None) -> Dataset:
    """Return an OpenML dataset, downloading it only when the cache has no copy."""
    cached = load_cached(cache_dir, dataset_id)
    if cached is not None:
        return cached
    download_to_cache(dataset_id, cache_dir, http_get)
    ds = load_cached(cache_dir, dataset_id)
    assert ds is not None
    return ds


__all__ = [
    "ChecksumMismatch",
    "DatasetNotFound",
    "DatasetUnavailable",
    "DEFAULT_CACHE",
    "download_to_cache",
    "fetch_openml",
    "load_cached",
    "sha256_file",
]
