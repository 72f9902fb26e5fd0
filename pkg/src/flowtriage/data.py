"""Flow dataset ingestion, cleaning, scaling, splitting and class rebalancing."""

import json
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.neighbors import NearestNeighbors


class DataError(ValueError):
    """Raised for malformed input data or violated preconditions."""


@dataclass
class FlowTable:
    """Column-oriented labeled dataset of flow feature vectors.

    rows is an (n, d) float64 matrix, labels an (n,) array in {0, 1} and
    row_ids an (n,) array of stable opaque integer identifiers.
    """

    feature_names: list[str]
    rows: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.row_ids = np.asarray(self.row_ids, dtype=np.int64)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_names):
            raise DataError("row matrix width does not match feature_names")
        if len(self.labels) != len(self.rows) or len(self.row_ids) != len(self.rows):
            raise DataError("labels/row_ids length mismatch")
        bad = set(np.unique(self.labels)) - {0, 1}
        if bad:
            raise DataError(f"labels must be 0/1, found {sorted(bad)}")
        if len(np.unique(self.row_ids)) != len(self.row_ids):
            raise DataError("row_ids are not unique")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def class_counts(self) -> dict[int, int]:
        return {
            0: int(np.sum(self.labels == 0)),
            1: int(np.sum(self.labels == 1)),
        }

    def take(self, indices) -> "FlowTable":
        idx = np.asarray(indices)
        return FlowTable(
            self.feature_names,
            self.rows[idx],
            self.labels[idx],
            self.row_ids[idx],
        )

    def index_of(self, row_id: int) -> int:
        hits = np.flatnonzero(self.row_ids == row_id)
        if len(hits) == 0:
            raise KeyError(f"unknown row_id {row_id}")
        return int(hits[0])


@dataclass
class SplitSpec:
    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError("train_fraction must be strictly between 0 and 1")


@dataclass
class BalancePolicy:
    """Resampling recipe applied to the train split (and optionally test).

    minority_oversample / majority_undersample carry target counts; None
    disables the step. balance_test equalizes test classes by random
    undersampling of the larger class.
    """

    smote_target: int | None = None
    smote_k: int = 5
    undersample_target: int | None = None
    balance_test: bool = True

    def __post_init__(self):
        if self.smote_target is not None and self.smote_target <= 0:
            raise DataError("smote_target must be positive")
        if self.undersample_target is not None and self.undersample_target <= 0:
            raise DataError("undersample_target must be positive")
        if self.smote_k < 1:
            raise DataError("smote_k must be >= 1")


@dataclass
class ScalerParams:
    feature_names: list[str]
    mins: np.ndarray
    maxs: np.ndarray


def load_csv(path, label_column: str, positive_label_values) -> FlowTable:
    """Load a labeled flow CSV, mapping raw labels to binary {0, 1}.

    A row's label becomes 1 when its raw value is in positive_label_values,
    else 0. Row order is preserved and row_ids are assigned sequentially.
    Non-numeric feature cells are an error; missing values pass through as
    NaN for ``clean`` to drop.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    frame = pd.read_csv(path)
    if len(frame) == 0:
        raise DataError("empty table")
    if label_column not in frame.columns:
        raise DataError(f"missing label column {label_column!r}")
    positive = {str(v) for v in positive_label_values}
    labels = frame[label_column].astype(str).isin(positive).to_numpy(dtype=np.int64)
    features = frame.drop(columns=[label_column])
    for col in features.columns:
        if features[col].dtype == object:
            coerced = pd.to_numeric(features[col], errors="coerce")
            bad = coerced.isna() & features[col].notna()
            if bad.any():
                row = int(np.flatnonzero(bad.to_numpy())[0])
                raise DataError(
                    f"non-numeric feature cell at row {row}, column {col!r}: "
                    f"{features[col].iloc[row]!r}"
                )
            features[col] = coerced
    return FlowTable(
        feature_names=[str(c) for c in features.columns],
        rows=features.to_numpy(dtype=np.float64),
        labels=labels,
        row_ids=np.arange(len(frame), dtype=np.int64),
    )


def clean(table: FlowTable, drop_columns=()) -> FlowTable:
    """Drop named columns, then drop every row with a non-finite value."""
    drop = list(drop_columns)
    unknown = [c for c in drop if c not in table.feature_names]
    if unknown:
        raise DataError(f"unknown column name(s): {unknown}")
    keep_cols = [i for i, name in enumerate(table.feature_names) if name not in drop]
    rows = table.rows[:, keep_cols]
    finite = np.isfinite(rows).all(axis=1)
    return FlowTable(
        feature_names=[table.feature_names[i] for i in keep_cols],
        rows=rows[finite],
        labels=table.labels[finite],
        row_ids=table.row_ids[finite],
    )


def fit_minmax(train: FlowTable) -> ScalerParams:
    """Learn per-feature (min, max) from the train split only."""
    if len(train) == 0:
        raise DataError("cannot fit scaler on empty table")
    return ScalerParams(
        feature_names=list(train.feature_names),
        mins=train.rows.min(axis=0),
        maxs=train.rows.max(axis=0),
    )


def apply_minmax(params: ScalerParams, table: FlowTable) -> FlowTable:
    """Map each value x to (x - min) / (max - min); constant features to 0.

    Values outside the train range are kept unclipped.
    """
    if params.feature_names != table.feature_names:
        raise DataError("scaler feature_names do not match the table's")
    span = params.maxs - params.mins
    scaled = np.where(span > 0, (table.rows - params.mins) / np.where(span > 0, span, 1.0), 0.0)
    return FlowTable(table.feature_names, scaled, table.labels, table.row_ids)


def split(table: FlowTable, spec: SplitSpec):
    """Deterministic stratified train/test split.

    Each class appears in both splits at approximately train_fraction; the
    two parts are disjoint and their union is the input table.
    """
    rng = np.random.default_rng(spec.seed)
    train_idx, test_idx = [], []
    for cls in (0, 1):
        members = np.flatnonzero(table.labels == cls)
        if len(members) < 2:
            raise DataError(f"class {cls} has fewer than 2 rows")
        perm = rng.permutation(members)
        n_train = int(round(spec.train_fraction * len(members)))
        n_train = min(max(n_train, 1), len(members) - 1)
        train_idx.append(perm[:n_train])
        test_idx.append(perm[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return table.take(train_idx), table.take(test_idx)


def smote_oversample(table: FlowTable, class_label: int, target_count: int,
                     k: int, seed: int) -> FlowTable:
    """Grow one class to target_count by SMOTE-style interpolation.

    Each synthetic row is x + u * (x_nn - x) for a uniformly chosen class
    member x, one of its k nearest same-class neighbors x_nn (Euclidean)
    and u uniform in [0, 1]. Synthetic rows get fresh row_ids.
    """
    members = np.flatnonzero(table.labels == class_label)
    if target_count < len(members):
        raise DataError("target_count below current class count")
    if len(members) < k + 1:
        raise DataError(f"class too small for k={k} neighbors")
    n_new = target_count - len(members)
    if n_new == 0:
        return table
    rng = np.random.default_rng(seed)
    pts = table.rows[members]
    nn = NearestNeighbors(n_neighbors=k + 1).fit(pts)
    _, neigh = nn.kneighbors(pts)  # column 0 is the point itself
    base = rng.integers(0, len(pts), size=n_new)
    pick = rng.integers(1, k + 1, size=n_new)
    u = rng.uniform(0.0, 1.0, size=n_new)
    x = pts[base]
    x_nn = pts[neigh[base, pick]]
    synthetic = x + u[:, None] * (x_nn - x)
    next_id = int(table.row_ids.max()) + 1
    return FlowTable(
        table.feature_names,
        np.vstack([table.rows, synthetic]),
        np.concatenate([table.labels, np.full(n_new, class_label, dtype=np.int64)]),
        np.concatenate([table.row_ids, np.arange(next_id, next_id + n_new)]),
    )


def random_undersample(table: FlowTable, class_label: int, target_count: int,
                       seed: int) -> FlowTable:
    """Retain a uniform random subset of one class; the other class untouched."""
    members = np.flatnonzero(table.labels == class_label)
    if target_count > len(members):
        raise DataError("target_count above current class count")
    rng = np.random.default_rng(seed)
    keep = rng.choice(members, size=target_count, replace=False)
    others = np.flatnonzero(table.labels != class_label)
    return table.take(np.sort(np.concatenate([keep, others])))


def save_table(table: FlowTable, csv_path: str, label_column: str = "label",
               scaler: ScalerParams | None = None) -> None:
    """Write the table as CSV plus a sidecar JSON manifest.

    The CSV carries a leading row_id column so identifiers survive a
    round-trip; the manifest records the schema and class counts.
    """
    frame = pd.DataFrame(table.rows, columns=table.feature_names)
    frame.insert(0, "row_id", table.row_ids)
    frame[label_column] = table.labels
    frame.to_csv(csv_path, index=False)
    manifest = {
        "feature_names": table.feature_names,
        "label_column": label_column,
        "row_count": len(table),
        "class_counts": {str(k): v for k, v in table.class_counts().items()},
        "scaler_params": None if scaler is None else {
            "feature_names": scaler.feature_names,
            "mins": scaler.mins.tolist(),
            "maxs": scaler.maxs.tolist(),
        },
    }
    with open(csv_path + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_table(csv_path: str) -> FlowTable:
    """Load a CSV previously written by ``save_table`` (manifest required)."""
    with open(csv_path + ".manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    frame = pd.read_csv(csv_path)
    names = manifest["feature_names"]
    return FlowTable(
        feature_names=names,
        rows=frame[names].to_numpy(dtype=np.float64),
        labels=frame[manifest["label_column"]].to_numpy(dtype=np.int64),
        row_ids=frame["row_id"].to_numpy(dtype=np.int64),
    )


def load_scaler(csv_path: str) -> ScalerParams | None:
    with open(csv_path + ".manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    raw = manifest.get("scaler_params")
    if raw is None:
        return None
    return ScalerParams(raw["feature_names"], np.asarray(raw["mins"]), np.asarray(raw["maxs"]))
