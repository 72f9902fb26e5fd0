"""Synthetic flow dataset generator.

Two well-separated Gaussian classes plus an optional "boundary noise"
cluster: rows drawn near the class boundary (attack-looking on a few
features, benign-looking on the rest) with coin-flip labels. The noise
cluster is what manufactures genuine FP/FN instances for triage exercises.
"""

import numpy as np
import pandas as pd

from .data import FlowTable


def make_synthetic(n_rows: int, n_features: int = 10, separation: float = 1.0,
                   noise_frac: float = 0.0, noise_features: int = 3,
                   seed: int = 0) -> FlowTable:
    if n_rows < 4:
        raise ValueError("n_rows must be at least 4")
    if not 0.0 <= noise_frac < 1.0:
        raise ValueError("noise_frac must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    n_noise = int(round(noise_frac * n_rows))
    n_clean = n_rows - n_noise
    n_attack = n_clean // 2
    n_benign = n_clean - n_attack

    benign = rng.normal(-separation, 1.0, size=(n_benign, n_features))
    attack = rng.normal(separation, 1.0, size=(n_attack, n_features))
    rows = [benign, attack]
    labels = [np.zeros(n_benign, dtype=np.int64), np.ones(n_attack, dtype=np.int64)]

    if n_noise:
        center = np.full(n_features, -separation)
        center[:noise_features] = separation
        noise = center + rng.normal(0.0, 0.4, size=(n_noise, n_features))
        rows.append(noise)
        labels.append(rng.integers(0, 2, size=n_noise).astype(np.int64))

    X = np.vstack(rows)
    y = np.concatenate(labels)
    order = rng.permutation(len(y))
    return FlowTable(
        feature_names=[f"f{i:02d}" for i in range(n_features)],
        rows=X[order],
        labels=y[order],
        row_ids=np.arange(len(y), dtype=np.int64),
    )


def write_raw_csv(table: FlowTable, path: str, label_column: str = "label") -> None:
    """Write in the raw ingest dialect: string class labels, no manifest."""
    frame = pd.DataFrame(table.rows, columns=table.feature_names)
    frame[label_column] = np.where(table.labels == 1, "attack", "benign")
    frame.to_csv(path, index=False)
