"""The three experiments: dimension sweep, PCA variance, embedding-augmented regressions."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import SentenceCorpus
from .errors import FormatError, InputFileNotFound, JoinEmpty, MissingSector
from .evaluation import (
    CLASSIFIERS,
    ClassifierReport,
    Dataset,
    ImportanceReport,
    evaluate,
    permutation_importance,
    split_train_test,
    train_classifier,
    train_forest_regressor,
)
from .ingest import CompanyTable, normalize_ticker
from .sgns import Embedding, Hyperparams, train
from .stats.ols import RegressionSummary, ols_fit, ols_summary
from .stats.pca import PcaResult, cumulative_variance, pca

logger = logging.getLogger(__name__)

DEFAULT_DIMS = (1, 2, 3, 4, 5, 6, 7, 8, 16, 32)
DEFAULT_EPSILON = 0.02
DEFAULT_HIGH_DIM = 32


def dim_names(d: int) -> list[str]:
    return [f"Dim{i}" for i in range(1, d + 1)]


def _sector_lookup(companies) -> dict[str, str]:
    if isinstance(companies, CompanyTable):
        return companies.sector_map()
    return dict(companies)


def sector_dataset(e: Embedding, companies) -> Dataset:
    """Embedding vectors labelled by sector, in vocabulary order.

    ``companies`` is a :class:`CompanyTable` or a ticker -> sector mapping.
    """
    sectors = _sector_lookup(companies)
    missing = [t for t in e.vocabulary if t not in sectors]
    if missing:
        raise MissingSector(f"no sector for ticker(s): {', '.join(missing)}")
    y = np.array([sectors[t] for t in e.vocabulary], dtype=object)
    return Dataset(np.array(e.vectors), y, dim_names(e.dimension), list(e.vocabulary))


@dataclass
class SweepResult:
    dims: list[int]
    classifiers: tuple[str, ...]
    accuracy: np.ndarray  # (len(dims), len(classifiers))
    seed: int
    reports: dict = field(default_factory=dict)  # (dim, classifier) -> ClassifierReport
    chosen: int | None = None
    epsilon: float | None = None

    def mean_accuracy(self) -> dict[int, float]:
        return {d: float(np.mean(row)) for d, row in zip(self.dims, self.accuracy)}

    def reports_at(self, d: int) -> dict[str, ClassifierReport]:
        return {clf: self.reports[(d, clf)] for clf in self.classifiers}


def evaluate_classifiers(ds: Dataset, seed: int, train_fraction: float = 0.7,
                         classifiers=CLASSIFIERS) -> dict[str, ClassifierReport]:
    """One stratified split, every classifier trained and scored on it."""
    train_ds, test_ds = split_train_test(ds, train_fraction, seed, stratified=True)
    return {k: evaluate(train_classifier(k, train_ds, seed), test_ds, seed) for k in classifiers}


def dimension_sweep(corpus: SentenceCorpus, dims, hp: Hyperparams, seed: int, companies,
                    train_fraction: float = 0.7, classifiers=CLASSIFIERS) -> SweepResult:
    """Sector-classification accuracy of every classifier for each embedding size."""
    dims = [int(d) for d in dims]
    if not dims or min(dims) < 1:
        raise ValueError("dims must be a non-empty list of positive integers")
    acc = np.zeros((len(dims), len(classifiers)))
    reports = {}
    for i, d in enumerate(dims):
        e = train(corpus, hp.with_(dimension=d, seed=seed))
        by_clf = evaluate_classifiers(sector_dataset(e, companies), seed, train_fraction, classifiers)
        for j, clf in enumerate(classifiers):
            acc[i, j] = by_clf[clf].accuracy
            reports[(d, clf)] = by_clf[clf]
        logger.info("sweep d=%d: %s", d, {k: round(r.accuracy, 3) for k, r in by_clf.items()})
    return SweepResult(dims, tuple(classifiers), acc, seed, reports)


def select_dimension(s: SweepResult, epsilon: float = DEFAULT_EPSILON) -> int:
    """Smallest tested dimension whose mean accuracy is within ``epsilon`` of the best."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    means = s.mean_accuracy()
    best = max(means.values())
    return min(d for d, m in means.items() if m >= best - epsilon)


@dataclass
class VarianceCurve:
    high_dim: int
    points: list[tuple[int, float]]
    pca: PcaResult


def variance_analysis(corpus: SentenceCorpus, high_dim: int, hp: Hyperparams, m_values) -> VarianceCurve:
    """Cumulative explained variance of a ``high_dim`` embedding at each ``m``."""
    m_values = sorted(set(int(m) for m in m_values))
    if not m_values or max(m_values) > high_dim:
        raise ValueError("need 1 <= m <= high_dim for every m")
    e = train(corpus, hp.with_(dimension=high_dim))
    result = pca(e.vectors)
    return VarianceCurve(high_dim, [(m, cumulative_variance(result, m)) for m in m_values], result)


def sector_projection(e: Embedding, companies) -> list[tuple[str, str, float, float]]:
    """Rows ``(ticker, sector, pc1, pc2)`` of the embedding on its first two components."""
    if len(e.vocabulary) < 2:
        raise ValueError("need at least two tokens to project")
    sectors = _sector_lookup(companies)
    result = pca(e.vectors)
    proj = result.transform(e.vectors, n_components=min(2, e.dimension))
    if proj.shape[1] == 1:
        proj = np.column_stack([proj, np.zeros(len(proj))])
    return [(t, sectors.get(t, ""), float(a), float(b)) for t, (a, b) in zip(e.vocabulary, proj)]


@dataclass
class TargetTable:
    tickers: list[str]
    target: np.ndarray
    baseline: np.ndarray
    baseline_columns: list[str]
    dropped: int = 0


def read_target_csv(path, target_column: str, baseline_columns=None, ticker_column: str = "ticker",
                    aliases=None) -> TargetTable:
    """Load a per-company target file.

    ``baseline_columns=None`` means every column other than the ticker and the
    target. Rows whose target or baseline values are not finite numbers are
    dropped and counted.
    """
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        lowered = [h.lower() for h in header]
        try:
            t_idx = lowered.index(ticker_column.lower())
            y_idx = header.index(target_column)
        except ValueError:
            raise FormatError(
                f"{path}: header {header} lacks ticker column {ticker_column!r} or target {target_column!r}"
            ) from None
        if baseline_columns is None:
            baseline_columns = [h for i, h in enumerate(header) if i not in (t_idx, y_idx)]
        missing = [c for c in baseline_columns if c not in header]
        if missing:
            raise FormatError(f"{path}: baseline column(s) {missing} not in header")
        b_idx = [header.index(c) for c in baseline_columns]
        tickers, ys, xs, dropped = [], [], [], 0
        for row in reader:
            if not row:
                continue
            try:
                vals = [float(row[i]) for i in [y_idx, *b_idx]]
            except (ValueError, IndexError):
                dropped += 1
                continue
            if not all(math.isfinite(v) for v in vals):
                dropped += 1
                continue
            tickers.append(normalize_ticker(row[t_idx], aliases))
            ys.append(vals[0])
            xs.append(vals[1:])
    return TargetTable(tickers, np.array(ys), np.array(xs, dtype=float).reshape(len(ys), len(b_idx)),
                       list(baseline_columns), dropped)


@dataclass
class RegressionExperiment:
    target: str
    baseline: RegressionSummary
    augmented: RegressionSummary
    importance: ImportanceReport
    joined_rows: int
    dropped_rows: int
    baseline_columns: list[str]
    augmented_columns: list[str]
    fitted: np.ndarray
    residuals: np.ndarray


def regression_experiment(target_csv, target_column: str, baseline_columns, e: Embedding,
                          ticker_column: str = "ticker", seed: int = 0,
                          count_variance: bool = False, n_trees: int = 100, repeats: int = 20,
                          aliases=None, name: str | None = None) -> RegressionExperiment:
    """Baseline OLS, OLS with the embedding columns added, and permutation importance.

    Importance is the permutation importance (drop in R^2) of a random-forest
    regressor fitted to the full augmented design.
    """
    table = read_target_csv(target_csv, target_column, baseline_columns, ticker_column, aliases)
    index = {t: i for i, t in enumerate(e.vocabulary)}
    keep = [i for i, t in enumerate(table.tickers) if t in index]
    dropped = table.dropped + len(table.tickers) - len(keep)
    if not keep:
        raise JoinEmpty(f"{target_csv}: no ticker matches the embedding vocabulary")
    tickers = [table.tickers[i] for i in keep]
    y = table.target[keep]
    X_base = table.baseline[keep]
    dims = dim_names(e.dimension)
    X_aug = np.column_stack([X_base, e.vectors[[index[t] for t in tickers]]])
    aug_cols = table.baseline_columns + dims

    base_fit = ols_fit(X_base, y, table.baseline_columns)
    aug_fit = ols_fit(X_aug, y, aug_cols)
    base = ols_summary(base_fit, X_base, y, count_variance, dep_variable=target_column)
    aug = ols_summary(aug_fit, X_aug, y, count_variance, dep_variable=target_column)

    ds = Dataset(X_aug, y.astype(float), aug_cols, tickers)
    forest = train_forest_regressor(ds, n_trees=n_trees, seed=seed)
    importance = permutation_importance(forest, ds, metric="r2", repeats=repeats, seed=seed)
    logger.info("%s: r2 %.3f -> %.3f over %d rows (%d dropped)", target_column, base.r2, aug.r2,
                len(y), dropped)
    return RegressionExperiment(name or target_column, base, aug, importance, len(y), dropped,
                                list(table.baseline_columns), aug_cols, aug_fit.fitted, aug_fit.residuals)
