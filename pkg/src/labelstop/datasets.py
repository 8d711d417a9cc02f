"""Datasets: synthetic Gaussian classes, CSV ingestion, stratified folds."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    pass


class ClassTooSmallError(DatasetError):
    pass


@dataclass(frozen=True)
class LabelledExample:
    features: tuple
    label: int


@dataclass(eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    num_classes: int
    name: str = "dataset"
    class_names: tuple = field(default=())

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise DatasetError("features must form a 2-d array")
        if self.y.shape != (self.X.shape[0],):
            raise DatasetError("one label per example required")
        if self.num_classes < 2:
            raise DatasetError("need at least two classes")
        if self.y.size and (self.y.min() < 0 or self.y.max() >= self.num_classes):
            raise DatasetError("labels outside [0, num_classes)")

    def __len__(self):
        return self.X.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def examples(self) -> list[LabelledExample]:
        return [LabelledExample(tuple(x), int(c)) for x, c in zip(self.X.tolist(), self.y)]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.num_classes, self.name, self.class_names)


def class_means(num_classes: int, dim: int, class_separation: float, rng) -> np.ndarray:
    if dim >= num_classes:
        directions = np.eye(dim)[:num_classes]
    else:
        directions = rng.standard_normal((num_classes, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return class_separation * directions


def gen_gaussian_mixture(num_classes: int, dim: int, class_separation: float, count_per_class: int, seed: int) -> Dataset:
    """Unit-covariance Gaussian classes with means ``class_separation`` from the origin.

    With ``dim >= num_classes`` the means sit on distinct coordinate axes;
    otherwise they point along seeded random unit directions.  Examples
    are returned in shuffled order.
    """
    if num_classes < 2 or dim < 1 or count_per_class < 1:
        raise DatasetError("need num_classes >= 2, dim >= 1 and count_per_class >= 1")
    rng = np.random.default_rng(seed)
    means = class_means(num_classes, dim, class_separation, rng)
    y = np.repeat(np.arange(num_classes), count_per_class)
    X = means[y] + rng.standard_normal((y.size, dim))
    perm = rng.permutation(y.size)
    return Dataset(X[perm], y[perm], num_classes, name=f"gauss{num_classes}x{dim}")


def load_csv(
    path,
    label_column=-1,
    ignore_columns=(),
    class_map: dict | None = None,
    header: bool = False,
    delimiter: str = ",",
    name: str | None = None,
) -> Dataset:
    """Parse a delimited text file into a :class:`Dataset`.

    ``label_column`` and ``ignore_columns`` take column positions, or
    column names when ``header`` is true.  ``class_map`` maps raw label
    strings to class indices; without it the sorted distinct labels are
    numbered from zero.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    start = 0
    names = None
    if header:
        if not rows:
            raise DatasetError(f"{path}: missing header")
        names = [c.strip() for c in rows[0]]
        start = 1
    body = [(lineno, row) for lineno, row in enumerate(rows[start:], start=start + 1) if any(c.strip() for c in row)]
    if not body:
        raise DatasetError(f"{path}: no data rows")
    width = len(body[0][1])

    def resolve(col):
        if isinstance(col, str):
            if names is None or col not in names:
                raise DatasetError(f"{path}: unknown column {col!r}")
            return names.index(col)
        col = int(col)
        return col % width

    label_idx = resolve(label_column)
    skip = {resolve(c) for c in ignore_columns} | {label_idx}
    feature_cols = [c for c in range(width) if c not in skip]

    raw_labels, feats = [], []
    for lineno, row in body:
        if len(row) != width:
            raise DatasetError(f"{path}:{lineno}: expected {width} fields, found {len(row)}")
        try:
            feats.append([float(row[c]) for c in feature_cols])
        except ValueError as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from None
        raw_labels.append((lineno, row[label_idx].strip()))

    if class_map is None:
        distinct = sorted({lab for _, lab in raw_labels})
        class_map = {lab: i for i, lab in enumerate(distinct)}
    else:
        class_map = {str(k): int(v) for k, v in class_map.items()}
    y = []
    for lineno, lab in raw_labels:
        if lab not in class_map:
            raise DatasetError(f"{path}:{lineno}: unknown class label {lab!r}")
        y.append(class_map[lab])
    num_classes = max(max(class_map.values()) + 1, 2)
    inverse = {v: k for k, v in class_map.items()}
    return Dataset(
        np.array(feats, dtype=np.float64),
        np.array(y, dtype=np.int64),
        num_classes,
        name or path.stem,
        tuple(inverse.get(i, str(i)) for i in range(num_classes)),
    )


def save_csv(dataset: Dataset, path) -> None:
    """Write features then the label name, one example per line."""
    names = dataset.class_names or tuple(str(i) for i in range(dataset.num_classes))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        for x, c in zip(dataset.X.tolist(), dataset.y.tolist()):
            w.writerow([repr(v) for v in x] + [names[c]])


def minmax_scale(dataset: Dataset) -> Dataset:
    lo = dataset.X.min(axis=0)
    span = dataset.X.max(axis=0) - lo
    span[span == 0] = 1.0
    return Dataset((dataset.X - lo) / span, dataset.y, dataset.num_classes, dataset.name, dataset.class_names)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: tuple
    seed: int

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """``(train indices, test indices)`` for one fold."""
        a = np.asarray(self.assignments)
        return np.flatnonzero(a != fold), np.flatnonzero(a == fold)

    def to_dict(self) -> dict:
        return {"k": self.k, "seed": self.seed, "assignments": list(self.assignments)}


def stratified_kfold(labels, k: int, seed) -> FoldPlan:
    """Assign every example to one of ``k`` folds, class by class.

    Each class is shuffled and dealt round-robin; the dealing position
    carries over between classes so total fold sizes also stay within one.
    """
    y = np.asarray(labels.y if isinstance(labels, Dataset) else labels, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty(y.size, dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        if members.size < k:
            raise ClassTooSmallError(f"class {c} has {members.size} members, fewer than k={k}")
        members = rng.permutation(members)
        out[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    return FoldPlan(k, tuple(int(v) for v in out), seed if isinstance(seed, int) else repr(seed))


def gen_gaussian_holdout(
    num_classes: int, dim: int, class_separation: float, train_per_class: int, test_per_class: int, seed: int
) -> tuple[Dataset, Dataset]:
    """Training pool and test set drawn from one set of class means."""
    full = gen_gaussian_mixture(num_classes, dim, class_separation, train_per_class + test_per_class, seed)
    seen = np.zeros(num_classes, dtype=np.int64)
    is_train = np.empty(len(full), dtype=bool)
    for i, c in enumerate(full.y):
        is_train[i] = seen[c] < train_per_class
        seen[c] += 1
    return full.subset(np.flatnonzero(is_train)), full.subset(np.flatnonzero(~is_train))
