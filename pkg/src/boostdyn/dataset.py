"""Binary-labeled datasets: CSV ingestion, bit-exact persistence, and splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_feature_matrix, check_labels


class DatasetError(ValueError):
    """Raised when a dataset cannot be constructed or parsed."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus -1/+1 labels.

    Invariants: at least 2 examples, at least 1 feature, all feature
    values finite, labels in {-1, +1}.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        try:
            X = check_feature_matrix(self.features)
            y = check_labels(self.labels, X.shape[0])
        except ValueError as exc:
            raise DatasetError(str(exc)) from None
        if X.shape[0] < 2:
            raise DatasetError(f"need at least 2 examples, got {X.shape[0]}")
        if X.shape[1] < 1:
            raise DatasetError("need at least 1 feature")
        if self.feature_names is not None:
            names = tuple(self.feature_names)
            if len(names) != X.shape[1]:
                raise DatasetError(
                    f"{len(names)} feature names for {X.shape[1]} features"
                )
            object.__setattr__(self, "feature_names", names)
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)

    def has_both_labels(self) -> bool:
        return bool((self.labels == 1).any() and (self.labels == -1).any())


def require_both_labels(ds: Dataset) -> None:
    """Boosting needs at least one example of each class."""
    if not ds.has_both_labels():
        raise DatasetError("training set must contain both labels")


def _parse_feature(cell: str, row: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DatasetError(
            f"non-numeric feature value {cell!r} at row {row}, column {col}"
        ) from None
    if not np.isfinite(value):
        raise DatasetError(
            f"non-finite feature value {cell!r} at row {row}, column {col}"
        )
    return value


def _map_label(cell: str, mapping: dict | None, row: int) -> int:
    raw = cell.strip()
    if mapping is not None:
        for key, signed in mapping.items():
            if raw == str(key).strip():
                return int(signed)
        raise DatasetError(f"label {raw!r} at row {row} not covered by label mapping")
    if raw in ("-1", "1", "+1"):
        return 1 if raw in ("1", "+1") else -1
    raise DatasetError(
        f"label {raw!r} at row {row} is not -1/+1; pass a label mapping"
    )


def load_csv(path, label_column="label", label_mapping: dict | None = None) -> Dataset:
    """Load a comma-separated dataset.

    `label_column` selects the label by header name or integer position.
    `label_mapping` maps raw label strings to -1/+1; without it labels
    must already be -1/+1. The header row is optional and detected by
    attempting to parse the first row as numbers.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DatasetError(f"{path}: empty file")

    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DatasetError(f"{path}: ragged rows (expected width {width})")
    if width < 2:
        raise DatasetError(f"{path}: need at least one feature column plus labels")

    def _is_numeric(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header: list[str] | None = None
    if not all(_is_numeric(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DatasetError(f"{path}: header but no data rows")

    if isinstance(label_column, int):
        label_idx = label_column if label_column >= 0 else width + label_column
        if not 0 <= label_idx < width:
            raise DatasetError(f"{path}: label column index {label_column} out of range")
    else:
        if header is None:
            raise DatasetError(
                f"{path}: label column named {label_column!r} requires a header row"
            )
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise DatasetError(
                f"{path}: no column named {label_column!r} in header {header}"
            ) from None

    feature_cols = [j for j in range(width) if j != label_idx]
    names = tuple(header[j] for j in feature_cols) if header is not None else None

    features = np.empty((len(rows), len(feature_cols)), dtype=np.float64)
    labels = np.empty(len(rows), dtype=np.int8)
    for i, row in enumerate(rows):
        for k, j in enumerate(feature_cols):
            features[i, k] = _parse_feature(row[j], i, j)
        labels[i] = _map_label(row[label_idx], label_mapping, i)

    try:
        return Dataset(features, labels, names)
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset with a header; floats use shortest round-trip form."""
    names = ds.feature_names or tuple(f"x{j}" for j in range(ds.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*names, "label"])
        for i in range(ds.m):
            writer.writerow(
                [*(repr(float(v)) for v in ds.features[i]), int(ds.labels[i])]
            )


def split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffle split into (train, test).

    Parts are disjoint, their union is the input, and the training part
    must keep both labels. Row order within each part follows the input.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test fraction must be in (0, 1), got {test_fraction}")
    n_test = int(round(ds.m * test_fraction))
    n_train = ds.m - n_test
    # Dataset demands >= 2 rows, so anything smaller is a degenerate split.
    if n_test < 2 or n_train < 2:
        raise DatasetError(
            f"degenerate split: {n_train} train / {n_test} test rows from m={ds.m}"
        )
    perm = np.random.default_rng(seed).permutation(ds.m)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train = ds.subset(train_idx)
    if not train.has_both_labels():
        raise DatasetError("degenerate split: training part has a single label")
    return train, ds.subset(test_idx)
