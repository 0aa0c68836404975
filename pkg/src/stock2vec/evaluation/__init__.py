"""From-scratch classifiers, splitting, scoring and permutation importance."""

from .data import Dataset, split_train_test
from .importance import (
    ImportanceReport,
    oob_permutation_importance,
    permutation_importance,
)
from .metrics import ClassifierReport, accuracy, confusion_matrix, evaluate, r2_score
from .naive_bayes import GaussianNB, predict_gnb, train_gnb
from .svm import LinearSVM, predict_svm, train_svm
from .tree import (
    DecisionTree,
    RandomForest,
    predict_forest,
    predict_tree,
    train_forest,
    train_forest_regressor,
    train_tree,
    train_tree_regressor,
)

CLASSIFIERS = ("gnb", "svm", "tree", "forest")


def train_classifier(kind: str, train: Dataset, seed: int = 0):
    """Train one of :data:`CLASSIFIERS` with its default hyperparameters."""
    if kind == "gnb":
        return train_gnb(train)
    if kind == "svm":
        return train_svm(train, seed=seed)
    if kind == "tree":
        return train_tree(train)
    if kind == "forest":
        return train_forest(train, seed=seed)
    raise ValueError(f"unknown classifier {kind!r}")


__all__ = [
    "CLASSIFIERS",
    "ClassifierReport",
    "Dataset",
    "DecisionTree",
    "GaussianNB",
    "ImportanceReport",
    "LinearSVM",
    "RandomForest",
    "accuracy",
    "confusion_matrix",
    "evaluate",
    "oob_permutation_importance",
    "permutation_importance",
    "predict_forest",
    "predict_gnb",
    "predict_svm",
    "predict_tree",
    "r2_score",
    "split_train_test",
    "train_classifier",
    "train_forest",
    "train_forest_regressor",
    "train_gnb",
    "train_svm",
    "train_tree",
    "train_tree_regressor",
]
