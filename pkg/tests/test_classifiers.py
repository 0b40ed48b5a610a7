import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tesseract import DataError
from tesseract.classifiers import (
    C45Classifier,
    DegenerateTaskError,
    GaussianNaiveBayes,
    ManifestMismatch,
    Model,
    RandomForest,
    add_errors,
    log2_features,
    make_estimator,
    parse_model_kind,
    predict,
    train,
)
from tesseract.classifiers.tree import best_splits, choose_split
from tesseract.matrix import FeatureMatrix

KINDS = ["naive_bayes", "tree", "forest"]


def _separable(n=40, seed=0):
    # mirror-symmetric around 0.5 with a gap, so class = x > 0.5
    rng = np.random.default_rng(seed)
    half = rng.uniform(0.0, 0.45, size=n // 2)
    x = np.concatenate([half, 1.0 - half])
    rng.shuffle(x)
    return x.reshape(-1, 1), (x > 0.5).astype(int)


class TestTraining:
    @pytest.mark.parametrize("kind", KINDS)
    def test_separable_training_accuracy(self, kind):
        X, y = _separable()
        est = make_estimator(kind, seed=3).fit(X, y)
        assert (est.predict(X) == y).all()

    @pytest.mark.parametrize("kind", KINDS)
    def test_single_class_is_degenerate(self, kind):
        with pytest.raises(DegenerateTaskError, match="degenerate task"):
            make_estimator(kind).fit(np.zeros((4, 2)), np.ones(4, dtype=int))

    def test_labels_must_be_binary(self):
        with pytest.raises(ValueError):
            GaussianNaiveBayes().fit(np.zeros((3, 1)), [0, 1, 2])

    def test_forest_determinism(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 8))
        y = (X[:, 0] + rng.normal(scale=0.8, size=60) > 0).astype(int)
        probe = rng.normal(size=(30, 8))
        a = RandomForest(n_estimators=25, random_state=5).fit(X, y).predict_proba(probe)
        b = RandomForest(n_estimators=25, random_state=5).fit(X, y).predict_proba(probe)
        c = RandomForest(n_estimators=25, random_state=5, n_jobs=2).fit(X, y).predict_proba(probe)
        assert a.tobytes() == b.tobytes() == c.tobytes()

    def test_model_kind_aliases(self):
        assert [parse_model_kind(k) for k in ("nb", "J48", "rf", "c45")] == ["naive_bayes", "tree", "forest", "tree"]
        with pytest.raises(ValueError):
            parse_model_kind("svm")


def _gauss_log(x, mean, var):
    return -0.5 * math.log(2 * math.pi * var) - (x - mean) ** 2 / (2 * var)


class TestNaiveBayes:
    def test_hand_computed_posterior(self):
        X = np.array([[1.0, 0.0], [3.0, 1.0], [4.0, 1.0], [8.0, 1.0]])
        y = np.array([0, 0, 1, 1])
        probe = [2.5, 1.0]
        # class 0: means (2, 0.5), variances (1, 0.25); class 1: means (6, 1), variances (4, floor)
        params = {0: [(2.0, 1.0), (0.5, 0.25)], 1: [(6.0, 4.0), (1.0, 1e-9)]}
        joint = {c: math.log(0.5) + sum(_gauss_log(x, m, v) for x, (m, v) in zip(probe, params[c]))
                 for c in (0, 1)}
        top = max(joint.values())
        expected = math.exp(joint[1] - top) / sum(math.exp(v - top) for v in joint.values())
        got = GaussianNaiveBayes().fit(X, y).predict_proba(np.array([probe]))[0, 1]
        assert got == pytest.approx(expected, abs=1e-9)

    def test_symmetric_score(self):
        X = np.array([[0.0], [2.0], [0.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        assert GaussianNaiveBayes().fit(X, y).predict_proba([[5.0]])[0, 1] == pytest.approx(0.5, abs=1e-12)

    def test_state_round_trip(self):
        X, y = _separable()
        nb = GaussianNaiveBayes().fit(X, y)
        back = GaussianNaiveBayes.from_state(nb.to_state())
        assert np.array_equal(back.predict_proba(X), nb.predict_proba(X))


def _entropy(pos, n):
    if n == 0 or pos in (0, n):
        return 0.0
    p = pos / n
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def _brute_gain(column, y, min_leaf):
    """Best information gain over every midpoint threshold, by enumeration."""
    n, total = len(y), sum(y)
    best = -math.inf
    values = sorted(set(column))
    for a, b in zip(values, values[1:]):
        t = (a + b) / 2
        left = [yy for xx, yy in zip(column, y) if xx <= t]
        if len(left) < min_leaf or n - len(left) < min_leaf:
            continue
        g = _entropy(total, n) - len(left) / n * _entropy(sum(left), len(left)) \
            - (n - len(left)) / n * _entropy(total - sum(left), n - len(left))
        best = max(best, g)
    return best


class TestTree:
    def test_overfit_tree_recalls_training_row(self):
        rng = np.random.default_rng(2)
        X = rng.integers(0, 5, size=(30, 3)).astype(float)
        X[:, 0] = np.arange(30)
        y = rng.integers(0, 2, size=30)
        y[:2] = [0, 1]
        tree = C45Classifier(min_samples_leaf=1, prune=False).fit(X, y)
        assert (tree.predict(X) == y).all()

    def test_leaf_score_is_class_proportion(self):
        X = np.array([[0.0]] * 3 + [[1.0]] * 3)
        y = np.array([0, 0, 1, 1, 1, 1])
        tree = C45Classifier(prune=False).fit(X, y)
        assert tree.predict_proba([[0.0]])[0, 1] == pytest.approx(1 / 3)

    def test_pruning_collapses_noise(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(200, 4))
        y = rng.integers(0, 2, size=200)
        pruned = C45Classifier().fit(X, y)
        grown = C45Classifier(prune=False).fit(X, y)
        assert pruned.n_leaves < grown.n_leaves

    def test_add_errors_reference_values(self):
        # C4.5 reference values at CF 0.25
        assert add_errors(6, 0, 0.25) == pytest.approx(6 * (1 - 0.25 ** (1 / 6)))
        assert add_errors(10, 10, 0.25) == 0.0
        assert add_errors(16, 1, 0.25) > 0

    @settings(max_examples=60)
    @given(arrays(np.int8, st.tuples(st.integers(6, 30), st.integers(1, 4)), elements=st.integers(0, 4)),
           st.data())
    def test_gain_matches_enumeration_and_choice_rule(self, X, data):
        X = X.astype(float)
        y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(X), max_size=len(X))))
        gain, ratio, _ = best_splits(X, y, np.arange(X.shape[1]), 2)
        for j in range(X.shape[1]):
            expected = _brute_gain(list(X[:, j]), list(y), 2)
            if math.isinf(expected):
                assert math.isinf(gain[j])
            else:
                assert gain[j] == pytest.approx(expected, abs=1e-12)
        assert (ratio >= 0).all()
        j = choose_split(gain, ratio)
        ok = np.isfinite(gain) & (gain > 1e-12)
        if j is None:
            assert not ok.any()
        else:
            cand = ok & (gain >= gain[ok].mean() - 1e-12)
            assert cand[j] and ratio[j] == ratio[cand].max()

    @pytest.mark.parametrize("kind", ["tree", "forest"])
    @settings(max_examples=15)
    @given(seed=st.integers(0, 1000), scale=st.sampled_from([0.5, 2.0, 8.0, 1024.0]))
    def test_positive_scaling_invariance(self, kind, seed, scale):
        rng = np.random.default_rng(seed)
        X = rng.integers(0, 6, size=(40, 3)).astype(float)
        y = (X[:, 0] + rng.integers(0, 3, size=40) > 4).astype(int)
        y[:2] = [0, 1]
        probe = rng.integers(0, 6, size=(20, 3)).astype(float)
        scaled, scaled_probe = X.copy(), probe.copy()
        scaled[:, 1] *= scale
        scaled_probe[:, 1] *= scale
        hp = {"n_estimators": 10} if kind == "forest" else {}
        a = make_estimator(kind, seed=seed, **hp).fit(X, y).predict_proba(probe)
        b = make_estimator(kind, seed=seed, **hp).fit(scaled, y).predict_proba(scaled_probe)
        assert np.array_equal(a, b)

    def test_state_round_trip(self):
        X, y = _separable()
        tree = C45Classifier().fit(X, y)
        back = C45Classifier.from_state(tree.to_state())
        assert np.array_equal(back.predict_proba(X), tree.predict_proba(X))


class TestForest:
    def test_log2_features(self):
        assert [log2_features(f) for f in (1, 2, 3, 8, 100)] == [1, 2, 2, 4, 7]

    def test_one_tree_equals_unpruned_tree(self):
        rng = np.random.default_rng(7)
        X = rng.integers(0, 4, size=(50, 5)).astype(float)
        y = (X[:, 1] + X[:, 3] > 3).astype(int)
        forest = RandomForest(n_estimators=1, max_features=5, min_samples_leaf=1, random_state=11).fit(X, y)
        rows = forest.bootstrap_rows(0, len(y))
        tree = C45Classifier(min_samples_leaf=1, prune=False).fit(X[rows], y[rows])
        probe = rng.integers(0, 4, size=(40, 5)).astype(float)
        assert np.array_equal(forest.predict(probe), tree.predict(probe))

    def test_score_is_brute_force_vote_fraction(self):
        # symmetric data with no usable feature: each tree is one leaf voting its bootstrap majority
        X = np.zeros((8, 2))
        y = np.array([0, 1] * 4)
        forest = RandomForest(n_estimators=40, random_state=2).fit(X, y)
        votes = []
        for i in range(40):
            labels = list(y[forest.bootstrap_rows(i, 8)])
            if len(set(labels)) == 1:
                labels.append(1 - labels[0])
            votes.append(sum(labels) / len(labels) > 0.5)
        score = forest.predict_proba(np.zeros((1, 2)))[0, 1]
        assert all(t.n_leaves == 1 for t in forest.estimators_)
        assert score == sum(votes) / 40

    def test_state_round_trip(self):
        X, y = _separable()
        rf = RandomForest(n_estimators=5, random_state=1).fit(X, y)
        back = RandomForest.from_state(rf.to_state())
        assert np.array_equal(back.predict_proba(X), rf.predict_proba(X))


def _matrix():
    X, y = _separable(20)
    cols = [("TEXT", "x"), ("NLP", "p"), ("LABEL", "java:Summary")]
    values = np.hstack([X, (X > 0.3).astype(float), y.reshape(-1, 1)])
    return FeatureMatrix([f"r{i}" for i in range(20)], cols, values)


class TestModel:
    @pytest.mark.parametrize("kind", ["nb", "j48", "rf"])
    def test_json_round_trip(self, kind, tmp_path):
        m = train(_matrix(), kind, {"n_estimators": 7} if kind == "rf" else None, seed=4)
        path = tmp_path / "model.json"
        m.save(path)
        back = Model.load(path)
        X = _matrix().X
        assert back.task == "java:Summary"
        assert np.array_equal(back.predict(X)[1], m.predict(X)[1])
        assert back.to_json() == m.to_json()

    def test_tampered_manifest(self):
        m = train(_matrix(), "nb")
        text = m.to_json().replace('"TEXT", "x"', '"TEXT", "y"')
        with pytest.raises(DataError, match="manifest"):
            Model.from_json(text)

    def test_manifest_mismatch_lists_columns(self):
        m = train(_matrix(), "j48")
        with pytest.raises(ManifestMismatch) as info:
            predict(m, [0.2, 1.0], [("TEXT", "x"), ("NLP", "q")])
        assert info.value.missing == [("NLP", "p")] and info.value.extra == [("NLP", "q")]
        assert "NLP:p" in str(info.value) and "NLP:q" in str(info.value)

    def test_single_row_predict(self):
        m = train(_matrix(), "j48")
        label, score = predict(m, [0.9, 1.0], [("TEXT", "x"), ("NLP", "p")])
        assert label == 1 and 0.5 < score <= 1.0
