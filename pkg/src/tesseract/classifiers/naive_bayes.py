"""Gaussian naive Bayes with an absolute variance floor."""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._base import as_dense, check_binary_labels, check_n_features


class GaussianNaiveBayes(ClassifierMixin, BaseEstimator):
    """Naive Bayes with one Gaussian per (class, feature).

    Binary features are treated as numeric like every other column.

    Parameters
    ----------
    var_floor : float
        Lower bound on each per-class feature variance.
    """

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X = as_dense(X)
        y = check_binary_labels(y, X.shape[0])
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        counts = np.bincount(y, minlength=2).astype(float)
        self.class_prior_ = counts / counts.sum()
        self.theta_ = np.vstack([X[y == c].mean(axis=0) for c in (0, 1)])
        # population variance (divide by n), floored
        self.var_ = np.vstack([np.maximum(X[y == c].var(axis=0), self.var_floor) for c in (0, 1)])
        return self

    def _joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            var = self.var_[c]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var)) - 0.5 * np.sum((X - self.theta_[c]) ** 2 / var, axis=1)
            out[:, c] = np.log(self.class_prior_[c]) + ll
        return out

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "theta_")
        X = as_dense(X)
        check_n_features(self, X)
        jll = self._joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def to_state(self) -> dict:
        return {"var_floor": self.var_floor, "class_prior": self.class_prior_.tolist(),
                "theta": self.theta_.tolist(), "var": self.var_.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "GaussianNaiveBayes":
        est = cls(var_floor=state["var_floor"])
        est.classes_ = np.array([0, 1])
        est.class_prior_ = np.asarray(state["class_prior"], dtype=float)
        est.theta_ = np.asarray(state["theta"], dtype=float)
        est.var_ = np.asarray(state["var"], dtype=float)
        est.n_features_in_ = est.theta_.shape[1]
        return est
