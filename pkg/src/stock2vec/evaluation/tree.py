"""CART decision trees and random forests (classification and regression).

Split search is exhaustive over the candidate features and the midpoints of
sorted distinct values. Ties are resolved toward the lower feature index, then
the lower threshold. A node is split whenever it is impure and some split
respects ``min_leaf``, even if that split does not reduce impurity (XOR needs
this at the root).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset

_TIE = 1e-12


@dataclass(frozen=True)
class _Arrays:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # class counts (classification) or mean (regression)


class DecisionTree:
    """A fitted CART tree. Build with :func:`train_tree` or :func:`train_tree_regressor`."""

    def __init__(self, arrays, n_features, labels=(), impurity_importance=None):
        self._a = arrays
        self.n_features = n_features
        self.labels = tuple(labels)
        self.impurity_importance = impurity_importance
        self.kind = "tree"

    @property
    def is_classifier(self) -> bool:
        return bool(self.labels)

    @property
    def node_count(self) -> int:
        return len(self._a.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.node_count, dtype=int)
        for i in range(self.node_count):
            if self._a.feature[i] >= 0:
                depth[self._a.left[i]] = depth[self._a.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X = np.asarray(X, dtype=float)
        a = self._a
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            feat = a.feature[node]
            internal = feat >= 0
            if not internal.any():
                return node
            go_left = X[rows[internal], feat[internal]] <= a.threshold[node[internal]]
            node[internal] = np.where(go_left, a.left[node[internal]], a.right[node[internal]])

    def predict_value(self, X) -> np.ndarray:
        return self._a.value[self.apply(X)]

    def predict(self, X) -> np.ndarray:
        values = self.predict_value(X)
        if not self.is_classifier:
            return values
        return np.array(self.labels, dtype=object)[np.argmax(values, axis=1)]


def _gini_costs(Y_sorted):
    """Weighted Gini of every prefix/suffix split of one-hot rows."""
    n = len(Y_sorted)
    left = np.cumsum(Y_sorted, axis=0)[:-1]
    right = left[-1] + Y_sorted[-1] - left
    n_left = np.arange(1, n)[:, None]
    n_right = n - n_left
    g_left = 1.0 - np.sum((left / n_left) ** 2, axis=1)
    g_right = 1.0 - np.sum((right / n_right) ** 2, axis=1)
    return (n_left[:, 0] * g_left + n_right[:, 0] * g_right) / n


def _sse_costs(y_sorted):
    """Weighted variance (SSE / n) of every prefix/suffix split."""
    n = len(y_sorted)
    # shift to reduce cancellation in the running sums of squares
    y = y_sorted - y_sorted.mean()
    s, s2 = np.cumsum(y)[:-1], np.cumsum(y * y)[:-1]
    tot, tot2 = s[-1] + y[-1], s2[-1] + y[-1] ** 2
    n_left = np.arange(1, n)
    n_right = n - n_left
    sse_left = s2 - s * s / n_left
    sse_right = (tot2 - s2) - (tot - s) ** 2 / n_right
    return (sse_left + sse_right) / n


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    return 0.0 if total == 0 else 1.0 - float(np.sum((counts / total) ** 2))


class _Builder:
    def __init__(self, X, target, classify, n_classes, max_depth, min_leaf, max_features, rng):
        self.X = X
        self.target = target
        self.classify = classify
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng
        self.nodes = []
        self.importance = np.zeros(X.shape[1])
        if classify:
            self.onehot = np.eye(n_classes)[target]

    def impurity(self, rows):
        if self.classify:
            return gini(np.bincount(self.target[rows], minlength=self.n_classes))
        y = self.target[rows]
        return float(np.mean((y - y.mean()) ** 2))

    def value(self, rows):
        if self.classify:
            return np.bincount(self.target[rows], minlength=self.n_classes).astype(float)
        return float(self.target[rows].mean())

    def candidate_features(self):
        p = self.X.shape[1]
        if self.max_features >= p:
            return range(p)
        return np.sort(self.rng.choice(p, size=self.max_features, replace=False))

    def best_split(self, rows):
        best = (math.inf, -1, 0.0)
        n = len(rows)
        lo, hi = self.min_leaf, n - self.min_leaf  # valid left sizes: lo..hi
        if hi < lo:
            return best
        for f in self.candidate_features():
            xs = self.X[rows, f]
            order = np.argsort(xs, kind="stable")
            xs = xs[order]
            if xs[0] == xs[-1]:
                continue
            if self.classify:
                costs = _gini_costs(self.onehot[rows[order]])
            else:
                costs = _sse_costs(self.target[rows[order]].astype(float))
            # cost[i-1] is the split with i rows on the left
            sizes = np.arange(1, n)
            valid = (xs[1:] > xs[:-1]) & (sizes >= lo) & (sizes <= hi)
            if not valid.any():
                continue
            cand = np.flatnonzero(valid)
            i = cand[np.argmin(costs[cand])]
            if costs[i] < best[0] - _TIE:
                a, b = xs[i], xs[i + 1]
                thr = 0.5 * (a + b)
                if not a <= thr < b:
                    thr = a
                best = (float(costs[i]), int(f), float(thr))
        return best

    def build(self, rows, depth):
        node = len(self.nodes)
        self.nodes.append([-1, 0.0, -1, -1, self.value(rows)])
        impurity = self.impurity(rows)
        if impurity <= 0.0 or (self.max_depth is not None and depth >= self.max_depth):
            return node
        cost, feature, thr = self.best_split(rows)
        if feature < 0:
            return node
        self.importance[feature] += len(rows) * (impurity - cost)
        go_left = self.X[rows, feature] <= thr
        left = self.build(rows[go_left], depth + 1)
        right = self.build(rows[~go_left], depth + 1)
        self.nodes[node][:4] = [feature, thr, left, right]
        return node

    def finish(self, labels):
        feats, thrs, lefts, rights, values = zip(*self.nodes)
        arrays = _Arrays(np.array(feats, dtype=np.int64), np.array(thrs), np.array(lefts, dtype=np.int64),
                         np.array(rights, dtype=np.int64), np.array(values))
        total = self.importance.sum()
        imp = self.importance / total if total > 0 else self.importance
        return DecisionTree(arrays, self.X.shape[1], labels, imp)


def _fit(X, target, classify, n_classes, labels, max_depth, min_leaf, max_features, rng):
    if len(X) < min_leaf:
        raise ValueError(f"need at least min_leaf={min_leaf} samples, got {len(X)}")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    b = _Builder(X, target, classify, n_classes, max_depth, min_leaf, max_features, rng)
    b.build(np.arange(len(X)), 0)
    return b.finish(labels)


def train_tree(train: Dataset, max_depth: int | None = None, min_leaf: int = 1,
               max_features: int | None = None, seed=None) -> DecisionTree:
    """Gini CART classifier; leaves predict the majority class, earlier label on ties."""
    p = train.n_features
    return _fit(train.X, train.label_indices(), True, len(train.labels), train.labels, max_depth,
                min_leaf, p if max_features is None else max_features, np.random.default_rng(seed))


def train_tree_regressor(train: Dataset, max_depth: int | None = None, min_leaf: int = 1,
                         max_features: int | None = None, seed=None) -> DecisionTree:
    p = train.n_features
    return _fit(train.X, train.y.astype(float), False, 0, (), max_depth, min_leaf,
                p if max_features is None else max_features, np.random.default_rng(seed))


def predict_tree(model: DecisionTree, X) -> np.ndarray:
    return model.predict(X)


class RandomForest:
    def __init__(self, trees, labels=(), n_features=0, in_bag=None):
        self.trees = trees
        self.labels = tuple(labels)
        self.n_features = n_features
        self.in_bag = in_bag  # training-row indices per tree, None when not bootstrapped
        self.kind = "forest"

    @property
    def impurity_importance(self) -> np.ndarray:
        return np.mean([t.impurity_importance for t in self.trees], axis=0)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if not self.labels:
            return np.mean([t.predict_value(X) for t in self.trees], axis=0)
        votes = np.zeros((len(X), len(self.labels)))
        rows = np.arange(len(X))
        for t in self.trees:
            votes[rows, np.argmax(t.predict_value(X), axis=1)] += 1
        return np.array(self.labels, dtype=object)[np.argmax(votes, axis=1)]


def default_max_features(p: int) -> int:
    return max(1, math.ceil(math.sqrt(p)))


def _forest(train, classify, n_trees, max_features, seed, bootstrap, max_depth, min_leaf):
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    p = train.n_features
    mf = default_max_features(p) if max_features is None else min(max_features, p)
    n = len(train)
    target = train.label_indices() if classify else train.y.astype(float)
    n_classes = len(train.labels) if classify else 0
    labels = train.labels if classify else ()
    trees, in_bag = [], []
    for ss in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(ss)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(_fit(train.X[rows], target[rows], classify, n_classes, labels, max_depth,
                          min_leaf, mf, rng))
        in_bag.append(rows)
    return RandomForest(trees, labels, p, in_bag if bootstrap else None)


def train_forest(train: Dataset, n_trees: int = 100, max_features: int | None = None, seed: int = 0,
                 bootstrap: bool = True, max_depth: int | None = None, min_leaf: int = 1) -> RandomForest:
    """Bagged Gini trees with per-split feature subsampling (default ceil(sqrt(p)))."""
    return _forest(train, True, n_trees, max_features, seed, bootstrap, max_depth, min_leaf)


def train_forest_regressor(train: Dataset, n_trees: int = 100, max_features: int | None = None,
                           seed: int = 0, bootstrap: bool = True, max_depth: int | None = None,
                           min_leaf: int = 1) -> RandomForest:
    return _forest(train, False, n_trees, max_features, seed, bootstrap, max_depth, min_leaf)


def predict_forest(model: RandomForest, X) -> np.ndarray:
    return model.predict(X)
