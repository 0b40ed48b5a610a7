"""Input validation shared by the binary classifiers."""
from __future__ import annotations

import numpy as np
from scipy import sparse
from sklearn.utils.validation import check_array


class DegenerateTaskError(ValueError):
    """Training labels contain a single class."""


def as_dense(X) -> np.ndarray:
    if sparse.issparse(X):
        X = X.toarray()
    return check_array(X, dtype=np.float64, ensure_all_finite=True)


def check_binary_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_rows:
        raise ValueError(f"expected {n_rows} labels, got shape {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    y = y.astype(np.int64)
    if len(np.unique(y)) < 2:
        raise DegenerateTaskError("degenerate task: training labels contain a single class")
    return y


def check_n_features(estimator, X: np.ndarray) -> None:
    if X.shape[1] != estimator.n_features_in_:
        raise ValueError(f"{type(estimator).__name__} was fit on {estimator.n_features_in_} "
                         f"features, got {X.shape[1]}")
