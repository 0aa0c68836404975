import csv
import json

import numpy as np
import pytest

from stock2vec.corpus import build_sentences
from stock2vec.errors import JoinEmpty, MissingSector, RankDeficient
from stock2vec.evaluation import CLASSIFIERS
from stock2vec.ingest import (
    build_change_panel,
    load_aliases,
    parse_company_csv,
    parse_price_csv,
)
from stock2vec.pipeline import (
    SweepResult,
    dimension_sweep,
    regression_experiment,
    sector_dataset,
    sector_projection,
    select_dimension,
    variance_analysis,
)
from stock2vec.report import ReportInputs, emit_report, sha256_file
from stock2vec.sgns import Embedding, Hyperparams, train
from stock2vec.synthetic import (
    FIXTURE_HYPERPARAMS,
    FIXTURE_SEED,
    _write_csv,
    generate_market,
)

HP = Hyperparams(seed=FIXTURE_SEED, workers=1, **FIXTURE_HYPERPARAMS)


def sweep_of(means, dims=None):
    dims = list(dims or range(1, len(means) + 1))
    acc = np.repeat(np.array(means, dtype=float)[:, None], len(CLASSIFIERS), axis=1)
    return SweepResult(dims, CLASSIFIERS, acc, seed=0)


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


@pytest.fixture(scope="module")
def three_sector(tmp_path_factory):
    d = tmp_path_factory.mktemp("three")
    prices, companies, aliases = generate_market(n_tickers=45, n_sectors=3, n_days=300, seed=3,
                                                 sector_strength=1.5)
    _write_csv(d / "p.csv", prices, ["date", "open", "high", "low", "close", "volume", "Name"])
    _write_csv(d / "c.csv", companies, ["Symbol", "Name", "Sector"])
    _write_csv(d / "a.csv", aliases, ["source_symbol", "canonical_symbol"])
    a = load_aliases(d / "a.csv")
    panel = build_change_panel(parse_price_csv(d / "p.csv", a), parse_company_csv(d / "c.csv", a))
    return panel, build_sentences(panel)


@pytest.fixture(scope="module")
def fixture_embedding(fixture_corpus):
    return train(fixture_corpus, HP)


class TestSelectDimension:
    def test_plateau_rule(self):
        assert select_dimension(sweep_of([0.30, 0.50, 0.58, 0.60, 0.605, 0.61]), 0.02) == 4

    def test_constant_means(self):
        assert select_dimension(sweep_of([0.4] * 5, [3, 4, 5, 6, 7]), 0.02) == 3

    def test_huge_epsilon(self):
        assert select_dimension(sweep_of([0.1, 0.9, 0.5], [2, 5, 9]), 1.0) == 2

    def test_order_invariant(self):
        means = [0.30, 0.50, 0.58, 0.60, 0.605, 0.61]
        perm = [5, 2, 0, 4, 1, 3]
        shuffled = sweep_of([means[i] for i in perm], [i + 1 for i in perm])
        assert select_dimension(shuffled, 0.02) == 4

    def test_nonpositive_epsilon(self):
        with pytest.raises(ValueError):
            select_dimension(sweep_of([0.5, 0.6]), 0.0)


class TestSectorDataset:
    def test_names_and_order(self, fixture_embedding, fixture_panel):
        ds = sector_dataset(fixture_embedding, fixture_panel.sector_map())
        assert ds.feature_names == ["Dim1", "Dim2", "Dim3", "Dim4"]
        assert list(ds.row_ids) == list(fixture_embedding.vocabulary)
        assert ds.X.shape == (len(fixture_embedding.vocabulary), 4)

    def test_missing_sector_named(self, fixture_embedding, fixture_panel):
        sectors = dict(fixture_panel.sector_map())
        victim = fixture_embedding.vocabulary[5]
        del sectors[victim]
        with pytest.raises(MissingSector, match=victim):
            sector_dataset(fixture_embedding, sectors)


class TestSweep:
    def test_block_correlated_sectors_beat_chance(self, three_sector):
        panel, corpus = three_sector
        s = dimension_sweep(corpus, [4], HP, FIXTURE_SEED, panel.sector_map())
        assert s.accuracy.shape == (1, 4)
        assert np.all(s.accuracy > 1 / 3), s.accuracy

    def test_deterministic(self, three_sector):
        panel, corpus = three_sector
        a = dimension_sweep(corpus, [2, 4], HP, 11, panel.sector_map())
        b = dimension_sweep(corpus, [2, 4], HP, 11, panel.sector_map())
        np.testing.assert_array_equal(a.accuracy, b.accuracy)
        assert select_dimension(a) == select_dimension(b)
        for key in a.reports:
            np.testing.assert_array_equal(a.reports[key].confusion, b.reports[key].confusion)

    def test_bad_dims(self, three_sector):
        panel, corpus = three_sector
        with pytest.raises(ValueError):
            dimension_sweep(corpus, [0], HP, 0, panel.sector_map())


class TestVarianceAndProjection:
    def test_curve(self, three_sector):
        _, corpus = three_sector
        curve = variance_analysis(corpus, 8, HP, range(1, 9))
        values = [v for _, v in curve.points]
        assert all(b >= a - 1e-15 for a, b in zip(values, values[1:]))
        assert abs(values[-1] - 1.0) <= 1e-10

    def test_m_above_high_dim(self, three_sector):
        with pytest.raises(ValueError):
            variance_analysis(three_sector[1], 4, HP, [5])

    def test_projection_properties(self, fixture_embedding, fixture_panel):
        rows = sector_projection(fixture_embedding, fixture_panel.sector_map())
        pcs = np.array([(a, b) for _, _, a, b in rows])
        assert np.max(np.abs(pcs.mean(axis=0))) <= 1e-8
        assert pcs[:, 0].var() >= pcs[:, 1].var()
        assert all(sector for _, sector, _, _ in rows)

    def test_identical_vectors_project_identically(self):
        rng = np.random.default_rng(0)
        V = rng.normal(size=(6, 3))
        V[4] = V[1]
        rows = sector_projection(Embedding(tuple("ABCDEF"), V), {})
        assert rows[1][2:] == rows[4][2:]


class TestRegressionExperiment:
    def test_planted_dim2(self, tmp_path, fixture_embedding):
        rng = np.random.default_rng(5)
        V = np.array(fixture_embedding.vectors)
        y = 3 * V[:, 1] + rng.normal(0, 0.1, len(V))
        rows = [(t, f"{y[i]:.10f}", f"{rng.normal():.6f}") for i, t in enumerate(fixture_embedding.vocabulary)]
        path = write_rows(tmp_path / "t.csv", ["ticker", "y", "noise"], rows)
        r = regression_experiment(path, "y", ["noise"], fixture_embedding, seed=FIXTURE_SEED)
        assert r.importance.ranking()[0] == "Dim2"
        assert r.augmented.r2 - r.baseline.r2 > 0.5
        assert r.augmented_columns == ["noise", "Dim1", "Dim2", "Dim3", "Dim4"]

    def test_join_counts(self, tmp_path, fixture_embedding):
        vocab = fixture_embedding.vocabulary
        rows = [(t, str(i), str(i % 7)) for i, t in enumerate(vocab)]
        rows += [("NOPE1", "1", "1"), ("NOPE2", "2", "2"), (vocab[0], "oops", "1")]
        path = write_rows(tmp_path / "t.csv", ["Ticker", "y", "x"], rows)
        r = regression_experiment(path, "y", ["x"], fixture_embedding, repeats=2, n_trees=10)
        assert (r.joined_rows, r.dropped_rows) == (len(vocab), 3)
        assert r.augmented.r2 >= r.baseline.r2

    def test_constant_target(self, tmp_path, fixture_embedding):
        rng = np.random.default_rng(1)
        rows = [(t, "7.5", f"{rng.normal():.6f}") for t in fixture_embedding.vocabulary]
        path = write_rows(tmp_path / "t.csv", ["ticker", "y", "x"], rows)
        r = regression_experiment(path, "y", ["x"], fixture_embedding, repeats=2, n_trees=10)
        assert r.baseline.r2 == 0.0 and r.baseline.degenerate_target
        assert all(c.t == 0.0 for c in r.augmented.coefficients[1:])

    def test_no_matches(self, tmp_path, fixture_embedding):
        path = write_rows(tmp_path / "t.csv", ["ticker", "y"], [("NOPE", "1")])
        with pytest.raises(JoinEmpty):
            regression_experiment(path, "y", [], fixture_embedding)

    def test_rank_deficient_baseline(self, tmp_path, fixture_embedding):
        rows = [(t, str(i), str(i), str(2 * i)) for i, t in enumerate(fixture_embedding.vocabulary)]
        path = write_rows(tmp_path / "t.csv", ["ticker", "y", "a", "b"], rows)
        with pytest.raises(RankDeficient, match="b"):
            regression_experiment(path, "y", ["a", "b"], fixture_embedding)


@pytest.fixture(scope="module")
def inputs(three_sector, fixture_embedding, tmp_path_factory):
    panel, corpus = three_sector
    sweep = dimension_sweep(corpus, [2, 4], HP, 1, panel.sector_map())
    sweep.chosen, sweep.epsilon = select_dimension(sweep), 0.02
    rng = np.random.default_rng(2)
    rows = [(t, f"{rng.normal():.6f}", f"{rng.normal():.6f}") for t in fixture_embedding.vocabulary]
    path = write_rows(tmp_path_factory.mktemp("t") / "t.csv", ["ticker", "y", "x"], rows)
    reg = regression_experiment(path, "y", ["x"], fixture_embedding, repeats=2, n_trees=10, name="demo")
    return ReportInputs(sweep=sweep, variance=variance_analysis(corpus, 4, HP, range(1, 5)),
                        projection=sector_projection(fixture_embedding, {}), regressions=[reg])


class TestEmitReport:
    def test_manifest_lists_exactly_the_written_files(self, inputs, tmp_path):
        manifest = emit_report(inputs, tmp_path)
        listed = {f["path"] for f in manifest["files"]}
        on_disk = {p.name for p in tmp_path.iterdir()} - {"manifest.json"}
        assert listed == on_disk
        expected = {"sweep_accuracy.csv", "variance_curve.csv", "sector_projection.csv", "importance_demo.csv",
                    "summary_demo_baseline.json", "summary_demo_augmented.json", "summary_demo_baseline.txt",
                    "summary_demo_augmented.txt", "residuals_demo.csv",
                    *(f"confusion_{c}.csv" for c in CLASSIFIERS)}
        assert expected <= listed
        assert json.loads((tmp_path / "manifest.json").read_text())["schema_version"] == 1
        for f in manifest["files"]:
            assert f["sha256"] == sha256_file(tmp_path / f["path"])

    def test_rerun_same_hashes(self, inputs, tmp_path):
        a = emit_report(inputs, tmp_path / "a")
        b = emit_report(inputs, tmp_path / "b")
        assert a == b

    def test_empty(self, tmp_path):
        manifest = emit_report(ReportInputs(), tmp_path)
        assert manifest["files"] == []
        assert [p.name for p in tmp_path.iterdir()] == ["manifest.json"]

    def test_sweep_csv_shape(self, inputs, tmp_path):
        emit_report(inputs, tmp_path)
        with open(tmp_path / "sweep_accuracy.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["dim", "classifier", "accuracy"] and len(rows) == 1 + 2 * len(CLASSIFIERS)
