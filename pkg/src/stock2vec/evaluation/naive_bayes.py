from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyClass
from .data import Dataset

VAR_FLOOR = 1e-9


@dataclass(frozen=True)
class GaussianNB:
    labels: tuple
    log_prior: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    kind = "gnb"

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        diff = X[:, None, :] - self.means[None, :, :]
        ll = -0.5 * (np.log(2 * np.pi * self.variances)[None] + diff**2 / self.variances[None])
        return self.log_prior[None, :] + ll.sum(axis=2)

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum: ties go to the earlier label
        idx = np.argmax(self.joint_log_likelihood(X), axis=1)
        return np.array(self.labels, dtype=object)[idx]


def train_gnb(train: Dataset) -> GaussianNB:
    """Per-class Gaussian feature model with variances floored at 1e-9 x the largest feature variance."""
    idx = train.label_indices()
    n_classes = len(train.labels)
    counts = np.bincount(idx, minlength=n_classes)
    if np.any(counts == 0):
        missing = [train.labels[c] for c in np.flatnonzero(counts == 0)]
        raise EmptyClass(f"no training samples for class(es) {missing}")
    means = np.array([train.X[idx == c].mean(axis=0) for c in range(n_classes)])
    variances = np.array([train.X[idx == c].var(axis=0) for c in range(n_classes)])
    floor = VAR_FLOOR * float(np.max(train.X.var(axis=0), initial=0.0))
    variances = np.maximum(variances, floor if floor > 0 else VAR_FLOOR)
    return GaussianNB(train.labels, np.log(counts / counts.sum()), means, variances)


def predict_gnb(model: GaussianNB, X) -> np.ndarray:
    return model.predict(X)
