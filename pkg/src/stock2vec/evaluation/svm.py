"""Linear one-vs-rest SVM trained with the Pegasos stochastic subgradient method."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass
from .data import Dataset


@dataclass(frozen=True)
class LinearSVM:
    labels: tuple
    weights: np.ndarray  # (classes, features), in standardized units
    bias: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    lam: float

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def standardize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        return self.standardize(X) @ self.weights.T + self.bias

    def predict(self, X) -> np.ndarray:
        idx = np.argmax(self.decision_function(X), axis=1)
        return np.array(self.labels, dtype=object)[idx]

    def objective(self, X, y_index) -> np.ndarray:
        """Per-class ``lam/2 ||w||^2 + mean hinge`` on the given data."""
        Z = self.standardize(X)
        out = []
        for c in range(len(self.labels)):
            y = np.where(y_index == c, 1.0, -1.0)
            out.append(hinge_objective(self.weights[c], self.bias[c], Z, y, self.lam))
        return np.array(out)


def hinge_objective(w, b, Z, y, lam) -> float:
    margins = y * (Z @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.mean(np.maximum(0.0, 1.0 - margins)))


def best_bias(scores, y) -> float:
    """Bias minimizing the mean hinge loss for fixed scores ``w . z``.

    The loss is convex and piecewise linear in the bias with kinks at
    ``y_i - scores_i``, so the minimum sits on one of them.
    """
    kinks = np.unique(y - scores)
    losses = np.maximum(0.0, 1.0 - y[None, :] * (scores[None, :] + kinks[:, None])).mean(axis=1)
    return float(kinks[np.argmin(losses)])


def _pegasos(Z, y, lam, epochs, rng):
    n, p = Z.shape
    w = np.zeros(p)
    b = best_bias(np.zeros(n), y)
    radius = 1.0 / np.sqrt(lam)
    w_sum, n_avg = np.zeros(p), 0
    t = 0
    avg_from = epochs // 2
    for epoch in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (Z[i] @ w + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y[i] * Z[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
            if epoch >= avg_from:
                w_sum += w
                n_avg += 1
        b = best_bias(Z @ w, y)
    w = w_sum / n_avg
    return w, best_bias(Z @ w, y)


def train_svm(train: Dataset, lam: float = 1e-4, epochs: int = 50, seed: int = 0) -> LinearSVM:
    """One binary Pegasos problem per class on standardized features.

    Pegasos steps update the weights only. The bias is unregularized and is
    re-solved exactly after every epoch. The returned weights average the
    iterates of the second half of the epochs, which damps the large early
    ``1/(lam t)`` steps.
    """
    if len(train.labels) < 2 or len(set(train.y.tolist())) < 2:
        raise SingleClass("an SVM needs at least two classes in the training data")
    if lam <= 0 or epochs < 1:
        raise ValueError("need lam > 0 and epochs >= 1")
    mean = train.X.mean(axis=0)
    scale = train.X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (train.X - mean) / scale
    idx = train.label_indices()
    seeds = np.random.SeedSequence(seed).spawn(len(train.labels))
    W, B = [], []
    for c in range(len(train.labels)):
        y = np.where(idx == c, 1.0, -1.0)
        w, b = _pegasos(Z, y, lam, epochs, np.random.default_rng(seeds[c]))
        W.append(w)
        B.append(b)
    return LinearSVM(train.labels, np.array(W), np.array(B), mean, scale, lam)


def predict_svm(model: LinearSVM, X) -> np.ndarray:
    return model.predict(X)
