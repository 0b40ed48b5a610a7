"""C4.5-style binary decision tree (gain ratio, pessimistic pruning)."""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from scipy.stats import norm
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._base import as_dense, check_binary_labels, check_n_features

LEAF = -1
_EPS = 1e-12
_LN2 = math.log(2.0)


def add_errors(n: float, e: float, cf: float) -> float:
    """Extra errors predicted at confidence ``cf`` for ``e`` errors in ``n`` cases.

    Upper confidence bound of the binomial error rate, as in C4.5's
    pessimistic pruning.
    """
    if cf > 0.5:
        raise ValueError("confidence factor must be <= 0.5")
    if e < 1:
        base = n * (1.0 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (add_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = norm.ppf(1.0 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


@njit(cache=True)
def _h2(pos, n):
    """Binary entropy in bits of ``pos`` positives among ``n`` rows."""
    if pos <= 0.0 or pos >= n:
        return 0.0
    p = pos / n
    q = 1.0 - p
    return -(p * math.log(p) + q * math.log(q)) / _LN2


@njit(cache=True)
def _best_splits_kernel(X, y, rows, features, min_leaf):
    n = rows.shape[0]
    k = features.shape[0]
    gain = np.full(k, -np.inf)
    ratio = np.zeros(k)
    thr = np.zeros(k)
    if n < 2 * min_leaf or k == 0:
        return gain, ratio, thr
    total_pos = 0.0
    for i in range(n):
        total_pos += y[i]
    h_parent = _h2(total_pos, n)
    vals = np.empty(n)
    for c in range(k):
        f = features[c]
        for i in range(n):
            vals[i] = X[rows[i], f]
        order = np.argsort(vals)
        best, best_r, pos = -np.inf, -1, 0.0
        # a cut after sorted position r keeps r + 1 rows on the left
        for r in range(n - min_leaf):
            pos += y[order[r]]
            if r < min_leaf - 1 or vals[order[r]] == vals[order[r + 1]]:
                continue
            left = r + 1.0
            g = h_parent - (left / n) * _h2(pos, left) - ((n - left) / n) * _h2(total_pos - pos, n - left)
            if g < 0.0:
                g = 0.0  # cancellation can leave -1e-17
            if g > best:
                best, best_r = g, r
        if best_r >= 0:
            gain[c] = best
            split_info = _h2(best_r + 1.0, n)
            ratio[c] = best / split_info if split_info > 0.0 else 0.0
            thr[c] = (vals[order[best_r]] + vals[order[best_r + 1]]) / 2.0
    return gain, ratio, thr


def best_splits(X: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int, rows=None):
    """Best-gain threshold split for each feature in ``features``.

    ``rows`` restricts ``X`` to a node's rows (``y`` is already restricted).
    Returns arrays ``(gain, gain_ratio, threshold)``; features without a
    valid split get gain ``-inf``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    rows = np.arange(X.shape[0]) if rows is None else rows
    return _best_splits_kernel(X, np.ascontiguousarray(y, dtype=np.float64), np.asarray(rows, dtype=np.int64),
                               np.asarray(features, dtype=np.int64), int(min_leaf))


@njit(cache=True)
def _choose_kernel(gain, ratio):
    total, cnt = 0.0, 0
    for i in range(gain.shape[0]):
        if np.isfinite(gain[i]) and gain[i] > _EPS:
            total += gain[i]
            cnt += 1
    if cnt == 0:
        return -1
    avg = total / cnt
    best, j = -np.inf, -1
    for i in range(gain.shape[0]):
        g = gain[i]
        if np.isfinite(g) and g > _EPS and g >= avg - _EPS and ratio[i] > best:
            best, j = ratio[i], i
    return j


@njit(cache=True)
def _node_split_kernel(X, y, rows, perm, m, min_leaf):
    """Examine ``perm`` in batches of ``m`` until one gives positive gain, then choose."""
    k = perm.shape[0]
    gain = np.empty(k)
    ratio = np.empty(k)
    thr = np.empty(k)
    used = 0
    while used < k:
        stop = min(used + m, k)
        g, r, t = _best_splits_kernel(X, y, rows, perm[used:stop], min_leaf)
        found = False
        for i in range(stop - used):
            gain[used + i], ratio[used + i], thr[used + i] = g[i], r[i], t[i]
            if np.isfinite(g[i]) and g[i] > _EPS:
                found = True
        used = stop
        if found:
            break
    j = _choose_kernel(gain[:used], ratio[:used])
    if j < 0:
        return -1, 0.0
    return perm[j], thr[j]


def choose_split(gain: np.ndarray, ratio: np.ndarray) -> int | None:
    """C4.5 rule: among splits with at least average gain, take the best gain ratio."""
    j = _choose_kernel(np.asarray(gain, dtype=np.float64), np.asarray(ratio, dtype=np.float64))
    return None if j < 0 else int(j)


class C45Classifier(ClassifierMixin, BaseEstimator):
    """Binary decision tree grown with the gain-ratio criterion.

    Parameters
    ----------
    min_samples_leaf : int
        Minimum training rows on each side of a split.
    confidence : float
        Confidence factor of the pessimistic error estimate used in pruning.
    prune : bool
        Collapse subtrees whose estimated error is not lower than a leaf's.
    max_features : int or None
        Random features examined per node (all when None). With a subset,
        more features are drawn until one gives positive gain.
    random_state : int or None
        Seed for feature sampling.
    """

    def __init__(self, min_samples_leaf: int = 2, confidence: float = 0.25, prune: bool = True,
                 max_features: int | None = None, random_state: int | None = None):
        self.min_samples_leaf = min_samples_leaf
        self.confidence = confidence
        self.prune = prune
        self.max_features = max_features
        self.random_state = random_state

    # node arrays: feature, threshold, left, right, counts (n0, n1)
    def _new_node(self, counts) -> int:
        self._feature.append(LEAF)
        self._threshold.append(0.0)
        self._left.append(LEAF)
        self._right.append(LEAF)
        self._counts.append(counts)
        return len(self._feature) - 1

    def _grow(self, X, y, idx, rng) -> int:
        ys = y[idx]
        n1 = int(ys.sum())
        node = self._new_node((len(idx) - n1, n1))
        if n1 == 0 or n1 == len(idx) or len(idx) < 2 * self.min_samples_leaf:
            return node
        n_features = X.shape[1]
        if self.max_features is None or self.max_features >= n_features:
            perm, m = np.arange(n_features), n_features
        else:
            perm, m = rng.permutation(n_features), max(1, int(self.max_features))
        f, t = _node_split_kernel(X, ys, idx, perm, m, self.min_samples_leaf)
        if f < 0:
            return node
        go_left = X[idx, f] <= t
        self._feature[node] = int(f)
        self._threshold[node] = float(t)
        left = self._grow(X, y, idx[go_left], rng)
        right = self._grow(X, y, idx[~go_left], rng)
        self._left[node] = left
        self._right[node] = right
        return node

    def _leaf_errors(self, node: int) -> float:
        n0, n1 = self._counts[node]
        n = n0 + n1
        e = n - max(n0, n1)
        return e + add_errors(n, e, self.confidence)

    def _prune(self, node: int) -> float:
        """Bottom-up pruning; returns the estimated errors of the (possibly pruned) subtree."""
        if self._feature[node] == LEAF:
            return self._leaf_errors(node)
        tree_err = self._prune(self._left[node]) + self._prune(self._right[node])
        leaf_err = self._leaf_errors(node)
        if leaf_err <= tree_err + 0.1:
            self._feature[node] = LEAF
            self._left[node] = self._right[node] = LEAF
            return leaf_err
        return tree_err

    def _compact(self):
        """Renumber reachable nodes in preorder."""
        keep, stack = [], [0]
        while stack:
            i = stack.pop()
            keep.append(i)
            if self._feature[i] != LEAF:
                stack.append(self._right[i])
                stack.append(self._left[i])
        remap = {old: new for new, old in enumerate(keep)}
        self.feature_ = np.array([self._feature[i] for i in keep], dtype=np.int64)
        self.threshold_ = np.array([self._threshold[i] for i in keep], dtype=float)
        self.left_ = np.array([remap.get(self._left[i], LEAF) for i in keep], dtype=np.int64)
        self.right_ = np.array([remap.get(self._right[i], LEAF) for i in keep], dtype=np.int64)
        self.counts_ = np.array([self._counts[i] for i in keep], dtype=np.int64)
        for name in ("_feature", "_threshold", "_left", "_right", "_counts"):
            delattr(self, name)

    def fit(self, X, y):
        X = as_dense(X)
        return self._fit_arrays(X, check_binary_labels(y, X.shape[0]))

    def _fit_arrays(self, X: np.ndarray, y: np.ndarray):
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self._feature, self._threshold, self._left, self._right, self._counts = [], [], [], [], []
        rng = np.random.default_rng(self.random_state)
        X = np.ascontiguousarray(X, dtype=np.float64)
        self._grow(X, y.astype(np.float64), np.arange(X.shape[0], dtype=np.int64), rng)
        if self.prune:
            self._prune(0)
        self._compact()
        return self

    @property
    def n_leaves(self) -> int:
        check_is_fitted(self, "feature_")
        return int((self.feature_ == LEAF).sum())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        check_is_fitted(self, "feature_")
        X = as_dense(X)
        check_n_features(self, X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature_[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature_[cur]] <= self.threshold_[cur]
            node[rows] = np.where(go_left, self.left_[cur], self.right_[cur])
            active = self.feature_[node] != LEAF
        return node

    def predict_proba(self, X) -> np.ndarray:
        leaves = self.apply(X)
        counts = self.counts_[leaves].astype(float)
        p1 = counts[:, 1] / counts.sum(axis=1)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def to_state(self) -> dict:
        return {
            "params": self.get_params(),
            "n_features": int(self.n_features_in_),
            "nodes": [
                {"feature": int(f), "threshold": float(t), "left": int(l), "right": int(r),
                 "counts": [int(c[0]), int(c[1])]}
                for f, t, l, r, c in zip(self.feature_, self.threshold_, self.left_, self.right_, self.counts_)
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "C45Classifier":
        est = cls(**state["params"])
        nodes = state["nodes"]
        est.classes_ = np.array([0, 1])
        est.n_features_in_ = int(state["n_features"])
        est.feature_ = np.array([nd["feature"] for nd in nodes], dtype=np.int64)
        est.threshold_ = np.array([nd["threshold"] for nd in nodes], dtype=float)
        est.left_ = np.array([nd["left"] for nd in nodes], dtype=np.int64)
        est.right_ = np.array([nd["right"] for nd in nodes], dtype=np.int64)
        est.counts_ = np.array([nd["counts"] for nd in nodes], dtype=np.int64)
        return est
