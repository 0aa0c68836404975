"""Permutation feature importance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .metrics import accuracy, check_features, r2_score

METRICS = {"accuracy": accuracy, "r2": r2_score}


@dataclass
class ImportanceReport:
    feature_names: list[str]
    scores: np.ndarray
    stds: np.ndarray
    repeats: int
    seed: int
    baseline: float
    metric: str
    impurity: np.ndarray | None = field(default=None)

    def ranking(self) -> list[str]:
        """Feature names by descending score (name order on ties)."""
        order = sorted(range(len(self.scores)), key=lambda j: (-self.scores[j], self.feature_names[j]))
        return [self.feature_names[j] for j in order]

    def rows(self):
        for j, name in enumerate(self.feature_names):
            imp = None if self.impurity is None else float(self.impurity[j])
            yield name, float(self.scores[j]), float(self.stds[j]), imp


def _metric(metric):
    if callable(metric):
        return getattr(metric, "__name__", "custom"), metric
    return metric, METRICS[metric]


def permuted_score(model, X, y, column, permutation, score_fn) -> float:
    Xp = np.array(X, dtype=float, copy=True)
    Xp[:, column] = X[permutation, column]
    return score_fn(y, model.predict(Xp))


def permutation_importance(model, ds: Dataset, metric="accuracy", repeats: int = 10,
                           seed: int = 0) -> ImportanceReport:
    """Mean drop in ``metric`` when each column is shuffled, over ``repeats`` shuffles.

    ``metric`` is ``"accuracy"``, ``"r2"`` or a callable ``f(y_true, y_pred)``.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    check_features(model, ds.X)
    name, score_fn = _metric(metric)
    baseline = score_fn(ds.y, model.predict(ds.X))
    rng = np.random.default_rng(seed)
    drops = np.zeros((ds.n_features, repeats))
    for j in range(ds.n_features):
        for r in range(repeats):
            drops[j, r] = baseline - permuted_score(model, ds.X, ds.y, j, rng.permutation(len(ds)), score_fn)
    return ImportanceReport(
        feature_names=list(ds.feature_names),
        scores=drops.mean(axis=1),
        stds=drops.std(axis=1),
        repeats=repeats,
        seed=seed,
        baseline=float(baseline),
        metric=name,
        impurity=getattr(model, "impurity_importance", None),
    )


def _oob_score(forest, X, y, oob, score_fn, column=None, rng=None) -> float:
    classify = bool(forest.labels)
    n = len(X)
    total = np.zeros((n, len(forest.labels))) if classify else np.zeros(n)
    count = np.zeros(n)
    for tree, rows in zip(forest.trees, oob):
        if len(rows) == 0:
            continue
        Xo = X[rows]
        if column is not None:
            Xo = Xo.copy()
            Xo[:, column] = Xo[rng.permutation(len(rows)), column]
        value = tree.predict_value(Xo)
        if classify:
            total[rows, np.argmax(value, axis=1)] += 1
        else:
            total[rows] += value
        count[rows] += 1
    seen = count > 0
    if classify:
        pred = np.array(forest.labels, dtype=object)[np.argmax(total[seen], axis=1)]
    else:
        pred = total[seen] / count[seen]
    return score_fn(y[seen], pred)


def oob_permutation_importance(forest, ds: Dataset, metric=None, repeats: int = 10,
                               seed: int = 0) -> ImportanceReport:
    """Permutation importance scored on out-of-bag rows.

    ``ds`` must be the forest's own training data. Each row is predicted only
    by trees whose bootstrap sample missed it, and a column is shuffled within
    each tree's out-of-bag rows. Rows that every tree saw are left out.
    ``metric`` defaults to accuracy for classifiers and R^2 for regressors.
    """
    if forest.in_bag is None:
        raise ValueError("out-of-bag importance needs a bootstrapped forest")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    check_features(forest, ds.X)
    if any(len(rows) != len(ds) for rows in forest.in_bag):
        raise ValueError("ds is not the data the forest was trained on")
    if metric is None:
        metric = "accuracy" if forest.labels else "r2"
    name, score_fn = _metric(metric)
    X = np.asarray(ds.X, dtype=float)
    n = len(X)
    oob = []
    for rows in forest.in_bag:
        mask = np.ones(n, dtype=bool)
        mask[rows] = False
        oob.append(np.flatnonzero(mask))
    baseline = _oob_score(forest, X, ds.y, oob, score_fn)
    rng = np.random.default_rng(seed)
    drops = np.zeros((ds.n_features, repeats))
    for j in range(ds.n_features):
        for r in range(repeats):
            drops[j, r] = baseline - _oob_score(forest, X, ds.y, oob, score_fn, j, rng)
    return ImportanceReport(
        feature_names=list(ds.feature_names),
        scores=drops.mean(axis=1),
        stds=drops.std(axis=1),
        repeats=repeats,
        seed=seed,
        baseline=float(baseline),
        metric=f"oob_{name}",
        impurity=forest.impurity_importance,
    )
