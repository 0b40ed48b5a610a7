"""Random forest of unpruned gain-ratio trees on bootstrap samples."""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .._util import derive_seed
from ._base import as_dense, check_binary_labels, check_n_features
from .tree import C45Classifier


def log2_features(n_features: int) -> int:
    """Default per-node feature count, ``floor(log2(F) + 1)``."""
    return int(math.floor(math.log2(max(n_features, 1)) + 1))


def _fit_tree(X, y, rows, params, seed):
    tree = C45Classifier(prune=False, random_state=seed, **params)
    return tree._fit_arrays(X[rows], y[rows])


class RandomForest(ClassifierMixin, BaseEstimator):
    """Bagged random trees; the score is the fraction of trees voting positive.

    Parameters
    ----------
    n_estimators : int
        Number of trees.
    max_features : {"log2", "sqrt"} or int
        Features examined per node.
    min_samples_leaf : int
        Minimum rows on each side of a split.
    random_state : int
        Root seed; tree ``i`` uses a seed derived from it and ``i``.
    n_jobs : int
        Worker threads for tree fitting; results do not depend on it.
    """

    def __init__(self, n_estimators: int = 100, max_features="log2", min_samples_leaf: int = 1,
                 random_state: int = 0, n_jobs: int = 1):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _resolve_max_features(self, n_features: int) -> int:
        mf = self.max_features
        if mf == "log2":
            return log2_features(n_features)
        if mf == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if isinstance(mf, (int, np.integer)) and mf >= 1:
            return int(min(mf, n_features))
        raise ValueError(f"bad max_features {mf!r}")

    def tree_seed(self, i: int) -> int:
        return derive_seed(int(self.random_state or 0), "tree", i)

    def bootstrap_rows(self, i: int, n_rows: int) -> np.ndarray:
        rng = np.random.default_rng(self.tree_seed(i))
        return rng.integers(0, n_rows, size=n_rows)

    def fit(self, X, y):
        X = as_dense(X)
        y = check_binary_labels(y, X.shape[0])
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.max_features_ = self._resolve_max_features(X.shape[1])
        params = {"min_samples_leaf": self.min_samples_leaf, "max_features": self.max_features_}
        jobs = []
        for i in range(self.n_estimators):
            rows = self.bootstrap_rows(i, X.shape[0])
            # a one-class bootstrap still makes a (single-leaf) tree
            if len(np.unique(y[rows])) < 2:
                rows = np.concatenate([rows, np.nonzero(y != y[rows[0]])[0][:1]])
            jobs.append((rows, self.tree_seed(i)))
        if self.n_jobs and self.n_jobs > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(self.n_jobs) as pool:
                self.estimators_ = list(pool.map(lambda job: _fit_tree(X, y, job[0], params, job[1]), jobs))
        else:
            self.estimators_ = [_fit_tree(X, y, rows, params, seed) for rows, seed in jobs]
        return self

    def votes(self, X) -> np.ndarray:
        """Per-tree 0/1 votes, shape (n_rows, n_estimators)."""
        check_is_fitted(self, "estimators_")
        X = as_dense(X)
        check_n_features(self, X)
        return np.column_stack([t.predict(X) for t in self.estimators_])

    def predict_proba(self, X) -> np.ndarray:
        p1 = self.votes(X).mean(axis=1)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def to_state(self) -> dict:
        return {"params": {k: v for k, v in self.get_params().items() if k != "n_jobs"},
                "n_features": int(self.n_features_in_), "max_features": int(self.max_features_),
                "trees": [{"seed": self.tree_seed(i), **t.to_state()} for i, t in enumerate(self.estimators_)]}

    @classmethod
    def from_state(cls, state: dict) -> "RandomForest":
        est = cls(**state["params"])
        est.classes_ = np.array([0, 1])
        est.n_features_in_ = int(state["n_features"])
        est.max_features_ = int(state["max_features"])
        est.estimators_ = [C45Classifier.from_state(t) for t in state["trees"]]
        return est
