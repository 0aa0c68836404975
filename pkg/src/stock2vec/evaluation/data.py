from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ClassTooSmall, TooFewRows


@dataclass
class Dataset:
    """Feature matrix with labels (class labels or real targets).

    ``labels`` fixes the class order used by every classifier for tie-breaking
    and by confusion matrices. It defaults to the sorted distinct values of
    ``y`` and is ignored for regression targets.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    row_ids: list[str] = field(default_factory=list)
    labels: tuple = ()

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y)
        if self.X.ndim != 2 or self.X.shape[0] != len(self.y):
            raise ValueError("X must be n x p with one label per row")
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("one feature name per column required")
        if not np.isfinite(self.X).all():
            raise ValueError("X contains NaN or Inf")
        if not self.row_ids:
            self.row_ids = [str(i) for i in range(len(self.y))]
        if not self.labels and self.y.dtype.kind not in "fc":
            self.labels = tuple(sorted(set(self.y.tolist())))

    def __len__(self):
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def label_indices(self) -> np.ndarray:
        lookup = {lab: i for i, lab in enumerate(self.labels)}
        return np.array([lookup[v] for v in self.y.tolist()], dtype=np.int64)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.X[rows], self.y[rows], list(self.feature_names),
                       [self.row_ids[i] for i in rows], self.labels)


def _n_train(n, fraction):
    return min(max(int(round(n * fraction)), 1), n - 1)


def split_train_test(ds: Dataset, train_fraction: float = 0.7, seed: int = 0,
                     stratified: bool = True) -> tuple[Dataset, Dataset]:
    """Seeded disjoint train/test partition.

    Stratified mode shuffles each class separately and sends
    ``round(fraction * class_size)`` members (at least one each way) to
    training.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(ds)
    if n < 2:
        raise TooFewRows(f"need at least 2 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    if not stratified:
        order = rng.permutation(n)
        k = _n_train(n, train_fraction)
        train, test = np.sort(order[:k]), np.sort(order[k:])
    else:
        idx = ds.label_indices()
        train, test = [], []
        for c, label in enumerate(ds.labels):
            members = np.flatnonzero(idx == c)
            if len(members) == 0:
                continue
            if len(members) < 2:
                raise ClassTooSmall(f"class {label!r} has a single member; cannot stratify")
            members = rng.permutation(members)
            k = _n_train(len(members), train_fraction)
            train.extend(members[:k])
            test.extend(members[k:])
        train, test = np.sort(np.array(train)), np.sort(np.array(test))
    return ds.subset(train), ds.subset(test)
