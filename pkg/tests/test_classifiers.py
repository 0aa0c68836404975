import math

import numpy as np
import pytest
from oracles import blobs

from stock2vec.errors import (
    ClassTooSmall,
    EmptyClass,
    FeatureMismatch,
    SingleClass,
    TooFewRows,
)
from stock2vec.evaluation import (
    CLASSIFIERS,
    Dataset,
    accuracy,
    confusion_matrix,
    evaluate,
    oob_permutation_importance,
    permutation_importance,
    split_train_test,
    train_classifier,
    train_forest,
    train_forest_regressor,
    train_gnb,
    train_svm,
    train_tree,
    train_tree_regressor,
)
from stock2vec.evaluation.importance import permuted_score
from stock2vec.evaluation.metrics import r2_score
from stock2vec.evaluation.svm import best_bias, hinge_objective
from stock2vec.evaluation.tree import _gini_costs, gini


def ds(X, y, labels=()):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return Dataset(X, np.asarray(y, dtype=object), [f"f{i}" for i in range(X.shape[1])], labels=labels)

def noisy_task(seed, n=300):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 5))
    y = np.where(X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.7, n) > 0, "pos", "neg")
    return ds(X, y)


XOR = ds([[0, 0], [0, 1], [1, 0], [1, 1]], ["a", "b", "b", "a"])


class TestSplit:
    def test_sizes(self):
        train, test = split_train_test(ds(np.arange(10), ["a"] * 10), 0.7, seed=0, stratified=False)
        assert (len(train), len(test)) == (7, 3)

    def test_stratified_per_class(self):
        train, test = split_train_test(ds(np.arange(20), ["A"] * 10 + ["B"] * 10), 0.7, seed=1)
        assert sorted(train.y.tolist()).count("A") == 7 and sorted(train.y.tolist()).count("B") == 7

    def test_disjoint_and_complete(self):
        data = blobs()
        train, test = split_train_test(data, 0.7, seed=3)
        ids = train.row_ids + test.row_ids
        assert sorted(ids, key=int) == data.row_ids and not set(train.row_ids) & set(test.row_ids)

    def test_deterministic(self):
        a = split_train_test(blobs(), 0.7, seed=5)
        b = split_train_test(blobs(), 0.7, seed=5)
        assert a[0].row_ids == b[0].row_ids

    def test_proportions_within_one_row(self):
        data = ds(np.arange(23), ["A"] * 13 + ["B"] * 7 + ["C"] * 3)
        train, _ = split_train_test(data, 0.7, seed=2)
        for label, size in (("A", 13), ("B", 7), ("C", 3)):
            assert abs(train.y.tolist().count(label) - 0.7 * size) <= 1

    def test_singleton_class(self):
        with pytest.raises(ClassTooSmall):
            split_train_test(ds(np.arange(5), ["A"] * 4 + ["B"]), 0.7, seed=0)

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            split_train_test(ds([1.0], ["A"]), 0.7, seed=0, stratified=False)


class TestGaussianNB:
    def test_separated_classes(self):
        rng = np.random.default_rng(0)
        X = np.concatenate([rng.normal(-10, 1, 50), rng.normal(10, 1, 50)])
        model = train_gnb(ds(X, ["neg"] * 50 + ["pos"] * 50))
        assert model.predict([[-10.0], [10.0]]).tolist() == ["neg", "pos"]

    def test_midpoint_tie_goes_to_first_label(self):
        model = train_gnb(ds([-11, -9, 9, 11], ["L", "L", "R", "R"]))
        assert model.predict([[0.0]]).tolist() == ["L"]

    def test_hand_posterior(self):
        # class A: {0, 1} -> mean 0.5, var 0.25; class B: {3, 5} -> mean 4, var 1; equal priors
        model = train_gnb(ds([0, 1, 3, 5], ["A", "A", "B", "B"]))

        def log_joint(x, mean, var):
            return math.log(0.5) - 0.5 * math.log(2 * math.pi * var) - (x - mean) ** 2 / (2 * var)

        points = [-1.0, 1.5, 2.0, 2.5, 6.0]
        expected = ["A" if log_joint(x, 0.5, 0.25) >= log_joint(x, 4, 1) else "B" for x in points]
        assert model.predict(np.array(points)[:, None]).tolist() == expected
        jll = model.joint_log_likelihood([[2.0]])[0]
        assert jll[0] == pytest.approx(log_joint(2.0, 0.5, 0.25), abs=1e-12)
        assert jll[1] == pytest.approx(log_joint(2.0, 4, 1), abs=1e-12)

    def test_variance_floor_prevents_nan(self):
        model = train_gnb(ds([[1, 0], [1, 5], [2, 0], [2, 9]], ["A", "A", "B", "B"]))
        assert np.isfinite(model.joint_log_likelihood([[1.5, 3.0]])).all()

    def test_empty_class(self):
        with pytest.raises(EmptyClass):
            train_gnb(ds([1, 2], ["A", "A"], labels=("A", "B")))


class TestSVM:
    def test_separable_full_training_accuracy(self):
        data = blobs(centers=((-2, 0), (2, 0)))
        model = train_svm(data, seed=0)
        assert accuracy(data.y, model.predict(data.X)) == 1.0

    def test_heavy_regularization_shrinks_weights(self):
        data = blobs(centers=((-2, 0), (2, 0)))
        model = train_svm(data, lam=1e6, epochs=5)
        assert np.max(np.abs(model.weights)) < 1e-5
        dv = model.decision_function(data.X)
        np.testing.assert_allclose(dv, np.broadcast_to(model.bias, dv.shape), atol=1e-4)

    def test_objective_below_zero_model(self):
        rng = np.random.default_rng(4)
        data = ds(rng.normal(size=(80, 3)), rng.choice(["a", "b", "c"], 80))
        model = train_svm(data, lam=1e-2, seed=1)
        Z = model.standardize(data.X)
        idx = data.label_indices()
        for c, obj in enumerate(model.objective(data.X, idx)):
            y = np.where(idx == c, 1.0, -1.0)
            assert obj <= hinge_objective(np.zeros(3), 0.0, Z, y, 1e-2) + 1e-12

    def test_best_bias_is_minimizer(self):
        rng = np.random.default_rng(2)
        s, y = rng.normal(size=40), rng.choice([-1.0, 1.0], 40)
        b = best_bias(s, y)
        loss = lambda bb: np.mean(np.maximum(0, 1 - y * (s + bb)))  # noqa: E731
        assert all(loss(b) <= loss(g) + 1e-12 for g in np.linspace(-4, 4, 801))

    def test_deterministic(self):
        data = blobs()
        a, b = train_svm(data, seed=3), train_svm(data, seed=3)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_single_class(self):
        with pytest.raises(SingleClass):
            train_svm(ds([1, 2, 3], ["A"] * 3))


class TestTree:
    def test_pure_input_single_leaf(self):
        model = train_tree(ds([1, 2, 3], ["A"] * 3))
        assert model.node_count == 1 and accuracy(["A"] * 3, model.predict([[1], [2], [3]])) == 1.0

    def test_xor(self):
        model = train_tree(XOR, max_depth=2)
        assert accuracy(XOR.y, model.predict(XOR.X)) == 1.0

    def test_depth_limit(self):
        assert train_tree(XOR, max_depth=1).depth == 1

    def test_weighted_gini(self):
        # 8 samples sorted so the first 4 are (2 of class 0, 2 of class 1) and the last 4 are class 0
        Y = np.zeros((8, 2))
        Y[[0, 2, 4, 5, 6, 7], 0] = 1
        Y[[1, 3], 1] = 1
        assert _gini_costs(Y)[3] == pytest.approx(0.25, abs=1e-15)
        assert gini([2, 2]) == 0.5 and gini([4, 0]) == 0.0

    def test_tie_prefers_lower_feature(self):
        data = ds([[0, 0], [1, 1]], ["a", "b"])
        model = train_tree(data)
        assert model._a.feature[0] == 0 and model._a.threshold[0] == 0.5

    def test_majority_leaf_label_order_tie(self):
        model = train_tree(ds([[0], [0]], ["b", "a"]))
        assert model.predict([[0.0]]).tolist() == ["a"]

    def test_min_leaf(self):
        model = train_tree(blobs(), min_leaf=10)
        leaves = model.apply(blobs().X)
        assert np.bincount(leaves)[np.bincount(leaves) > 0].min() >= 10

    def test_regressor_fits_step(self):
        X = np.linspace(0, 1, 20)
        y = np.where(X > 0.5, 3.0, -1.0)
        model = train_tree_regressor(Dataset(X[:, None], y, ["x"]))
        np.testing.assert_array_equal(model.predict(X[:, None]), y)


class TestForest:
    @pytest.mark.parametrize("data", [XOR, blobs(), noisy_task(0)], ids=["xor", "blobs", "noisy"])
    def test_degenerate_forest_equals_tree(self, data):
        forest = train_forest(data, n_trees=1, max_features=data.n_features, bootstrap=False, seed=9)
        tree = train_tree(data)
        probe = np.vstack([data.X, np.random.default_rng(1).normal(size=(50, data.n_features))])
        assert forest.predict(probe).tolist() == tree.predict(probe).tolist()

    def test_same_seed_same_predictions(self):
        data = noisy_task(1)
        a = train_forest(data, n_trees=20, seed=4).predict(data.X)
        b = train_forest(data, n_trees=20, seed=4).predict(data.X)
        assert a.tolist() == b.tolist()

    def test_not_worse_than_tree_on_noisy_task(self):
        forest_acc, tree_acc = [], []
        for seed in range(10):
            train, test = split_train_test(noisy_task(seed), 0.7, seed=seed)
            forest_acc.append(evaluate(train_forest(train, n_trees=30, seed=seed), test).accuracy)
            tree_acc.append(evaluate(train_tree(train), test).accuracy)
        assert np.mean(forest_acc) >= np.mean(tree_acc) - 0.05

    def test_in_bag_recorded(self):
        forest = train_forest(blobs(), n_trees=3, seed=0)
        assert len(forest.in_bag) == 3 and all(len(r) == 90 for r in forest.in_bag)
        assert train_forest(blobs(), n_trees=1, bootstrap=False).in_bag is None


class TestSeparableFixtures:
    @pytest.mark.parametrize("kind", CLASSIFIERS)
    def test_full_accuracy(self, kind):
        data = blobs(n_per=40, scale=0.4)
        train, test = split_train_test(data, 0.7, seed=0)
        assert evaluate(train_classifier(kind, train, seed=0), test).accuracy == 1.0


class TestEvaluate:
    def test_perfect(self):
        data = blobs()
        rep = evaluate(train_tree(data), data)
        assert rep.accuracy == 1.0
        assert np.count_nonzero(rep.confusion - np.diag(np.diag(rep.confusion))) == 0

    def test_constant_predictor(self):
        class Constant:
            n_features = 1
            kind = "constant"

            def predict(self, X):
                return np.array(["a"] * len(X), dtype=object)

        rep = evaluate(Constant(), ds(np.arange(9), list("abc") * 3))
        assert rep.accuracy == pytest.approx(1 / 3, abs=1e-15)

    @pytest.mark.parametrize("kind", CLASSIFIERS)
    def test_confusion_identities(self, kind):
        train, test = split_train_test(noisy_task(3), 0.7, seed=3)
        rep = evaluate(train_classifier(kind, train, seed=3), test, seed=3)
        counts = [test.y.tolist().count(lab) for lab in test.labels]
        assert rep.confusion.sum(axis=1).tolist() == counts
        assert rep.confusion.sum() == len(test)
        assert abs(np.trace(rep.confusion) / len(test) - rep.accuracy) < 1e-12

    def test_feature_mismatch(self):
        model = train_tree(blobs())
        with pytest.raises(FeatureMismatch):
            evaluate(model, ds(np.zeros((3, 3)), ["c0"] * 3))

    def test_confusion_matrix_orientation(self):
        m = confusion_matrix(["a", "a", "b"], ["b", "a", "b"], ("a", "b"))
        assert m.tolist() == [[1, 1], [0, 1]]

    def test_report_json(self):
        rep = evaluate(train_tree(XOR), XOR, seed=1)
        assert '"kind": "tree"' in rep.to_json()


class TestPermutationImportance:
    def leaky(self, seed=0):
        rng = np.random.default_rng(seed)
        y = rng.choice(["a", "b"], 200)
        X = np.column_stack([rng.normal(size=200), (y == "a").astype(float), rng.normal(size=200)])
        return ds(X, y)

    def test_leaky_feature_largest(self):
        data = self.leaky()
        rep = permutation_importance(train_forest(data, n_trees=20, seed=0), data, repeats=5, seed=0)
        assert rep.ranking()[0] == "f1"

    def test_noise_feature_near_zero(self):
        rng = np.random.default_rng(5)
        n = 300
        X = rng.normal(size=(n, 2))
        y = np.where(X[:, 0] > 0, "a", "b")
        train, test = split_train_test(ds(X, y), 0.7, seed=5)
        model = train_forest(train, n_trees=30, seed=5)
        rep = permutation_importance(model, test, repeats=20, seed=5)
        assert abs(rep.scores[1]) <= 0.05

    def test_identity_permutation_contributes_zero(self):
        data = self.leaky()
        model = train_tree(data)
        base = accuracy(data.y, model.predict(data.X))
        for j in range(3):
            assert base - permuted_score(model, data.X, data.y, j, np.arange(len(data)), accuracy) == 0.0

    def test_scores_finite_and_in_name_order(self):
        data = self.leaky()
        rep = permutation_importance(train_tree(data), data, repeats=3, seed=1)
        assert rep.feature_names == ["f0", "f1", "f2"] and np.isfinite(rep.scores).all()

    def test_r2_metric_for_regression(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(150, 3))
        y = 2 * X[:, 2] + 0.1 * rng.normal(size=150)
        data = Dataset(X, y, ["a", "b", "c"])
        rep = permutation_importance(train_forest_regressor(data, n_trees=20, seed=1), data, "r2", 5, 1)
        assert rep.ranking()[0] == "c" and rep.metric == "r2"

    def test_feature_mismatch(self):
        with pytest.raises(FeatureMismatch):
            permutation_importance(train_tree(blobs()), ds(np.zeros((4, 5)), ["c0"] * 4))

    def test_repeats_validated(self):
        with pytest.raises(ValueError):
            permutation_importance(train_tree(XOR), XOR, repeats=0)


class TestOOBImportance:
    def regression(self, seed=0, n=200):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 4))
        y = 3 * X[:, 1] + X[:, 3] + 0.5 * rng.normal(size=n)
        return Dataset(X, y, ["n0", "strong", "n2", "weak"])

    def test_ranks_signal_over_noise(self):
        data = self.regression()
        rep = oob_permutation_importance(train_forest_regressor(data, n_trees=50, seed=0), data, repeats=5)
        assert rep.ranking()[:2] == ["strong", "weak"]
        assert rep.metric == "oob_r2"

    def test_noise_features_near_zero(self):
        data = self.regression(seed=3)
        rep = oob_permutation_importance(train_forest_regressor(data, n_trees=50, seed=3), data, repeats=10)
        assert abs(rep.scores[0]) <= 0.05 and abs(rep.scores[2]) <= 0.05

    def test_baseline_is_oob_score(self):
        data = self.regression(seed=1, n=60)
        forest = train_forest_regressor(data, n_trees=10, seed=1)
        rep = oob_permutation_importance(forest, data, repeats=1)
        total, count = np.zeros(len(data)), np.zeros(len(data))
        for tree, rows in zip(forest.trees, forest.in_bag):
            oob = np.setdiff1d(np.arange(len(data)), rows)
            total[oob] += tree.predict(data.X[oob])
            count[oob] += 1
        seen = count > 0
        assert rep.baseline == pytest.approx(r2_score(data.y[seen], total[seen] / count[seen]), abs=1e-12)

    def test_classification_uses_accuracy(self):
        data = blobs()
        rep = oob_permutation_importance(train_forest(data, n_trees=20, seed=0), data, repeats=2)
        assert rep.metric == "oob_accuracy" and 0.9 <= rep.baseline <= 1.0

    def test_requires_bootstrap(self):
        forest = train_forest(XOR, n_trees=1, bootstrap=False)
        with pytest.raises(ValueError):
            oob_permutation_importance(forest, XOR)

    def test_requires_training_data(self):
        forest = train_forest(blobs(), n_trees=2, seed=0)
        with pytest.raises(ValueError):
            oob_permutation_importance(forest, blobs(n_per=10))
