"""Small synthetic CSV + sidecar datasets for runner tests."""

import numpy as np
import pandas as pd
import yaml


def write_dataset(directory, name="toy", n=60, d=3, seed=0, n_classes=2, categorical=False):
    """Gaussian blobs, one per class, written as <name>.csv + <name>.schema.yaml."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, n_classes, size=n)
    centers = rng.normal(scale=3.0, size=(n_classes, d))
    X = centers[y] + rng.normal(size=(n, d))
    frame = pd.DataFrame(X, columns=[f"f{j}" for j in range(d)])
    columns = [{"name": c, "kind": "numeric"} for c in frame.columns]
    if categorical:
        frame["cat"] = np.where(X[:, 0] > 0, "hi", "lo")
        columns.append({"name": "cat", "kind": "categorical"})
    frame["label"] = [f"c{v}" for v in y]
    columns.append({"name": "label", "kind": "categorical"})
    csv = directory / f"{name}.csv"
    frame.to_csv(csv, index=False)
    (directory / f"{name}.schema.yaml").write_text(yaml.safe_dump({"columns": columns, "target": "label"}))
    return csv
