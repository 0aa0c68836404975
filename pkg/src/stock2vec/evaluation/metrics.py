from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import FeatureMismatch
from .data import Dataset


@dataclass
class ClassifierReport:
    kind: str
    accuracy: float
    confusion: np.ndarray
    labels: tuple
    seed: int | None = None
    n_test: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "accuracy": self.accuracy,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "seed": self.seed,
            "n_test": self.n_test,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def accuracy(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true, dtype=object), np.asarray(y_pred, dtype=object)
    return float(np.mean(y_true == y_pred))


def r2_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    sst = float(np.sum((y_true - y_true.mean()) ** 2))
    ssr = float(np.sum((y_true - np.asarray(y_pred, dtype=float)) ** 2))
    return 0.0 if sst == 0 else 1.0 - ssr / sst


def confusion_matrix(y_true, y_pred, labels) -> np.ndarray:
    lookup = {lab: i for i, lab in enumerate(labels)}
    out = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(np.asarray(y_true).tolist(), np.asarray(y_pred).tolist()):
        out[lookup[t], lookup[p]] += 1
    return out


def check_features(model, X) -> None:
    if np.asarray(X).shape[1] != model.n_features:
        raise FeatureMismatch(f"model expects {model.n_features} features, got {np.asarray(X).shape[1]}")


def evaluate(model, test: Dataset, seed: int | None = None) -> ClassifierReport:
    """Accuracy and confusion matrix (rows true class, columns predicted)."""
    if len(test) == 0:
        raise ValueError("empty test set")
    check_features(model, test.X)
    pred = model.predict(test.X)
    conf = confusion_matrix(test.y, pred, test.labels)
    return ClassifierReport(
        kind=getattr(model, "kind", type(model).__name__),
        accuracy=float(np.trace(conf) / conf.sum()),
        confusion=conf,
        labels=tuple(test.labels),
        seed=seed,
        n_test=len(test),
    )
