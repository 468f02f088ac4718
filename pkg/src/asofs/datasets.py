"""CSV ingestion, seeded stratified splitting and train-referenced min-max scaling."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, DataError

__all__ = ["Dataset", "SplitSpec", "load_csv", "load_bundled", "make_xor_task", "split",
           "normalize", "prepare"]

BUNDLED = {"wine": "wine.csv", "zoo": "zoo.csv"}


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[tuple] = None
    name: str = "dataset"
    class_names: Optional[tuple] = None
    index: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if X.ndim != 2 or X.shape[1] < 1:
            raise DataError(f"features must be a 2-d matrix with >= 1 column, got {X.shape}")
        if len(X) != len(y):
            raise DataError(f"{len(X)} rows but {len(y)} labels")
        if not np.isfinite(X).all():
            raise DataError("features contain non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.index is None:
            object.__setattr__(self, "index", np.arange(len(y)))

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))

    def __len__(self):
        return len(self.labels)

    def subset(self, rows, features=None) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        X = self.features[rows] if features is None else features
        return Dataset(X, self.labels[rows], self.feature_names, self.name,
                       self.class_names, self.index[rows])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _is_number(cell: str) -> bool:
    try:
        v = float(cell)
    except ValueError:
        return False
    return math.isfinite(v)


def _resolve_label_column(label_column: Optional[int], width: int) -> int:
    if label_column is None:
        return width - 1
    col = label_column + width if label_column < 0 else label_column
    if not 0 <= col < width:
        raise DataError(f"label column index {label_column} out of range for {width} columns")
    return col


def load_csv(path, label_column: Union[str, int, None] = None, name: Optional[str] = None) -> Dataset:
    """Read a comma-separated feature table.

    The first row is a header when any of its feature cells is non-numeric.
    ``label_column`` is a header name or a (possibly negative) column index,
    defaulting to the last column. Class ids follow first-appearance order.
    Errors carry 1-based row numbers.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)]
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    width = len(rows[0][1])
    first = [c.strip() for c in rows[0][1]]

    # A column name can only be resolved against the header row itself.
    by_name = isinstance(label_column, str) and not label_column.lstrip("-").isdigit()
    if by_name:
        if label_column not in first:
            raise DataError(f"{path}: label column {label_column!r} not found in header")
        label_col = first.index(label_column)
    else:
        label_col = _resolve_label_column(
            None if label_column is None else int(label_column), width)
    header = None
    if by_name or any(not _is_number(c) for j, c in enumerate(first) if j != label_col):
        header = first
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    feats, raw_labels = [], []
    for lineno, r in rows:
        if len(r) != width:
            raise DataError(f"{path}: row {lineno} has {len(r)} columns, expected {width}")
        vals = []
        for j, c in enumerate(r):
            if j == label_col:
                continue
            c = c.strip()
            if c == "":
                raise DataError(f"{path}: row {lineno} column {j + 1} is missing")
            if not _is_number(c):
                raise DataError(f"{path}: row {lineno} column {j + 1} is non-numeric: {c!r}")
            vals.append(float(c))
        feats.append(vals)
        lab = r[label_col].strip()
        if lab == "":
            raise DataError(f"{path}: row {lineno} has an empty label")
        raw_labels.append(lab)

    ids: dict = {}
    labels = [ids.setdefault(lab, len(ids)) for lab in raw_labels]
    names = None
    if header is not None:
        names = tuple(h for j, h in enumerate(header) if j != label_col)
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]
    return Dataset(np.array(feats, dtype=float), np.array(labels, dtype=int), names, name,
                   tuple(ids))


def bundled_path(key: str) -> str:
    if key not in BUNDLED:
        raise DataError(f"unknown bundled dataset {key!r}; choose from {sorted(BUNDLED)}")
    return str(resources.files("asofs").joinpath("data", BUNDLED[key]))


def load_bundled(key: str) -> Dataset:
    """Load one of the shipped UCI tables ('wine': 178x13, 'zoo': 101x16)."""
    return load_csv(bundled_path(key), name=key)


def make_xor_task(n_instances: int = 200, n_noise: int = 8, seed: int = 0) -> Dataset:
    """Two uniform features whose thresholded XOR is the label, followed by noise columns.

    Neither informative feature predicts the label alone; together they do.
    """
    rng = np.random.default_rng(seed)
    X = rng.random((n_instances, 2 + n_noise))
    y = ((X[:, 0] > 0.5) ^ (X[:, 1] > 0.5)).astype(int)
    names = ("xor_a", "xor_b") + tuple(f"noise_{i}" for i in range(n_noise))
    return Dataset(X, y, names, f"xor{2 + n_noise}")


def split(dataset: Dataset, spec: SplitSpec = SplitSpec()) -> tuple:
    rng = np.random.default_rng(spec.seed)
    y = dataset.labels
    train_idx = []
    if spec.stratified:
        for c in np.unique(y):
            members = np.flatnonzero(y == c)
            if len(members) < 2:
                raise DataError(
                    f"class {c} has {len(members)} instance(s); stratified split needs >= 2"
                )
            n_train = max(1, math.floor(spec.train_fraction * len(members)))
            train_idx.extend(rng.permutation(members)[:n_train])
    else:
        if len(y) < 2:
            raise DataError("need at least 2 instances to split")
        n_train = max(1, math.floor(spec.train_fraction * len(y)))
        train_idx.extend(rng.permutation(len(y))[:n_train])
    in_train = np.zeros(len(y), dtype=bool)
    in_train[np.asarray(train_idx, dtype=int)] = True
    return dataset.subset(np.flatnonzero(in_train)), dataset.subset(np.flatnonzero(~in_train))


def normalize(train: Dataset, test: Dataset) -> tuple:
    if train.n_features != test.n_features:
        raise DataError("train and test partitions differ in feature count")
    lo = train.features.min(axis=0)
    span = train.features.max(axis=0) - lo
    const = span == 0
    safe = np.where(const, 1.0, span)

    def scale(X):
        Z = (X - lo) / safe
        Z[:, const] = 0.0
        return Z

    return train.subset(np.arange(len(train)), scale(train.features)), \
        test.subset(np.arange(len(test)), scale(test.features))


def prepare(dataset: Dataset, spec: SplitSpec = SplitSpec()) -> tuple:
    """Split then normalize with training statistics."""
    return normalize(*split(dataset, spec))
