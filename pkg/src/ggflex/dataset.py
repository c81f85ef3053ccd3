"""Binary datasets: loading, writing, scaling, synthesis and stratified folds."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "FoldPlan",
    "Normalization",
    "load_csv",
    "save_csv",
    "normalize_zscore",
    "deduplicate",
    "gen_gaussian_pair",
    "stratified_kfold",
]

POSITIVE = 1
NEGATIVE = 0


class DataError(ValueError):
    """Invalid input data (unparseable cells, bad labels, too few samples...)."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric features with binary labels (1 = positive, 0 = negative).

    Arrays are copied and marked read-only on construction.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: Optional[tuple] = None
    positive_label: str = "1"
    negative_label: str = "0"

    def __post_init__(self):
        X = _frozen(self.X, np.float64)
        y = _frozen(self.y, np.int8)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"{y.shape[0]} labels for {X.shape[0]} samples")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DataError(f"need m >= 2 samples and d >= 1 features, got {X.shape}")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite feature value at row {r}, column {c}")
        if not np.all((y == POSITIVE) | (y == NEGATIVE)):
            raise DataError("labels must be 0 (negative) or 1 (positive)")
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != X.shape[1]:
                raise DataError(f"{len(names)} feature names for {X.shape[1]} features")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_pos(self) -> int:
        return int(np.count_nonzero(self.y == POSITIVE))

    @property
    def n_neg(self) -> int:
        return int(np.count_nonzero(self.y == NEGATIVE))

    def require_both_classes(self):
        if self.n_pos == 0 or self.n_neg == 0:
            raise DataError(
                f"both classes are required (positives={self.n_pos}, negatives={self.n_neg})"
            )

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.y[idx], self.feature_names,
                       self.positive_label, self.negative_label)

    def with_features(self, X) -> "Dataset":
        return Dataset(X, self.y, self.feature_names, self.positive_label, self.negative_label)

    def digest(self) -> str:
        """SHA-256 over the feature bytes and labels."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# delimited text I/O
# ---------------------------------------------------------------------------


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = -1,
    positive_label: Optional[str] = None,
    delimiter: str = ",",
    header: bool = True,
) -> Dataset:
    """Read a delimited text file with one label column.

    ``label_column`` is a header name or a 0-based index (negative indices
    count from the end).  The file must contain exactly two distinct label
    values; ``positive_label`` names the positive one and is required unless
    the labels are exactly ``{"0", "1"}``.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names, rows = [c.strip() for c in rows[0]], rows[1:]
        first_data_line = 2
    else:
        names, first_data_line = None, 1
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if names is None or label_column not in names:
            raise DataError(f"{path}: label column {label_column!r} not found")
        lab = names.index(label_column)
    else:
        lab = int(label_column)
        if not -width <= lab < width:
            raise DataError(f"{path}: label column index {lab} out of range for {width} columns")
        lab %= width

    feats = []
    raw_labels = []
    for r, row in enumerate(rows):
        line = first_data_line + r
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} cells, expected {width}")
        vals = []
        for c, cell in enumerate(row):
            if c == lab:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {line}, column {c}: cannot parse {cell.strip()!r}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: row {line}, column {c}: non-finite value {cell.strip()!r}")
            vals.append(v)
        feats.append(vals)
        raw_labels.append(row[lab].strip())

    classes = sorted(set(raw_labels))
    if len(classes) < 2:
        raise DataError(f"{path}: single-class file (label {classes[0]!r})")
    if len(classes) > 2:
        raise DataError(f"{path}: more than two labels: {classes}")
    if positive_label is None:
        if classes != ["0", "1"]:
            raise DataError(f"{path}: positive_label required for labels {classes}")
        positive_label = "1"
    positive_label = str(positive_label).strip()
    if positive_label not in classes:
        raise DataError(f"{path}: positive label {positive_label!r} not among {classes}")
    negative_label = classes[1 - classes.index(positive_label)]

    y = np.array([lbl == positive_label for lbl in raw_labels], dtype=np.int8)
    fnames = None if names is None else tuple(n for c, n in enumerate(names) if c != lab)
    return Dataset(np.array(feats, dtype=np.float64), y, fnames, positive_label, negative_label)


def save_csv(data: Dataset, path: Union[str, Path], delimiter: str = ",", label_name: str = "label"):
    """Write ``data`` with the label in the last column.

    Floats are written with ``repr`` so ``load_csv`` reads them back exactly.
    """
    names = data.feature_names or tuple(f"x{j}" for j in range(data.d))
    labels = (data.negative_label, data.positive_label)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow([*names, label_name])
        for row, lbl in zip(data.X, data.y):
            w.writerow([repr(float(v)) for v in row] + [labels[lbl]])


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Normalization:
    means: np.ndarray
    stds: np.ndarray

    @classmethod
    def identity(cls, d: int) -> "Normalization":
        return cls(np.zeros(d), np.ones(d))

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.means) / self.stds

    def to_dict(self) -> dict:
        return {"means": [float(v) for v in self.means], "stds": [float(v) for v in self.stds]}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalization":
        return cls(np.asarray(d["means"], dtype=np.float64), np.asarray(d["stds"], dtype=np.float64))


def normalize_zscore(data: Dataset):
    """Standardize every feature to mean 0, population stddev 1.

    Constant features become all zeros (their scale is stored as 1).
    Returns the transformed dataset and the :class:`Normalization` that
    reproduces the transform on new points.
    """
    means = data.X.mean(axis=0)
    centred = data.X - means
    stds = np.sqrt((centred * centred).mean(axis=0))
    stds[stds == 0.0] = 1.0
    norm = Normalization(means, stds)
    return data.with_features(centred / stds), norm


def deduplicate(data: Dataset, conflicts: str = "drop"):
    """Collapse exactly repeated feature vectors, keeping first occurrences.

    A vector seen with both labels is a conflict: ``"drop"`` removes every
    copy of it, ``"error"`` raises.  Returns the reduced dataset and the
    original row indices it keeps.
    """
    if conflicts not in ("drop", "error"):
        raise ValueError(f"conflicts must be 'drop' or 'error', not {conflicts!r}")
    first = {}
    labels = {}
    for i, row in enumerate(data.X):
        key = row.tobytes()
        first.setdefault(key, i)
        labels.setdefault(key, set()).add(int(data.y[i]))
    bad = sorted(first[k] for k, s in labels.items() if len(s) > 1)
    if bad and conflicts == "error":
        raise DataError(f"feature vectors with both labels at rows {bad}")
    keep = np.array(sorted(i for k, i in first.items() if len(labels[k]) == 1), dtype=np.intp)
    return data.subset(keep), keep


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def gen_gaussian_pair(
    mu0: Sequence[float] = (3.0, 3.0),
    mu1: Sequence[float] = (5.0, 5.0),
    variance: float = 0.3,
    n_per_class: int = 500,
    seed: int = 0,
) -> Dataset:
    """Two isotropic Gaussian classes; ``mu1`` is the positive class.

    Rows are the ``n_per_class`` class-0 samples followed by the class-1
    samples.  Uses numpy's PCG64 generator seeded with ``seed``.
    """
    if variance < 0:
        raise DataError(f"variance must be >= 0, got {variance}")
    if n_per_class < 1:
        raise DataError(f"n_per_class must be >= 1, got {n_per_class}")
    mu0 = np.asarray(mu0, dtype=np.float64)
    mu1 = np.asarray(mu1, dtype=np.float64)
    rng = np.random.default_rng(seed)
    sd = np.sqrt(variance)
    z = rng.standard_normal((2 * n_per_class, mu0.shape[0]))
    X = np.vstack([mu0 + sd * z[:n_per_class], mu1 + sd * z[n_per_class:]])
    y = np.repeat(np.array([NEGATIVE, POSITIVE], dtype=np.int8), n_per_class)
    return Dataset(X, y, positive_label="1", negative_label="0")


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: np.ndarray = field(repr=False)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def splits(self):
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "seed": self.seed,
                           "assignments": [int(a) for a in self.assignments]})

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        d = json.loads(text)
        return cls(int(d["k"]), int(d["seed"]), np.asarray(d["assignments"], dtype=np.intp))


def stratified_kfold(data: Dataset, k: int, seed: int = 0) -> FoldPlan:
    """Assign samples to ``k`` folds, class by class, after a seeded shuffle.

    Each class is dealt round-robin, and the next class starts dealing where
    the previous one stopped so that fold sizes stay balanced too.
    """
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(data.m, dtype=np.intp)
    offset = 0
    for cls in (POSITIVE, NEGATIVE):
        idx = np.flatnonzero(data.y == cls)
        if len(idx) < k:
            raise DataError(f"class {cls} has {len(idx)} samples, fewer than k={k} folds")
        idx = rng.permutation(idx)
        assignments[idx] = (offset + np.arange(len(idx))) % k
        offset = (offset + len(idx)) % k
    return FoldPlan(k, seed, assignments)
