"""Cross-validation, precision/recall/F-measure and information-gain ranking."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse

from ._util import derive_seed
from .classifiers import make_estimator, parse_model_kind
from .matrix import SentenceFeatures, parse_feature_set
from .stats import FriedmanResult, friedman_nemenyi, nemenyi_cd

logger = logging.getLogger(__name__)

__all__ = [
    "Confusion", "PRF", "prf", "weighted_prf", "stratified_folds", "FoldResult", "EvalReport",
    "evaluate_cv", "information_gain", "RankedFeatures", "rank_features", "write_report_csv",
    "render_table", "friedman_nemenyi", "FriedmanResult", "nemenyi_cd", "REPORT_HEADER",
]


class Confusion(NamedTuple):
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other):
        return Confusion(*(a + b for a, b in zip(self, other)))

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "Confusion":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        return cls(int((t & p).sum()), int((~t & p).sum()), int((t & ~p).sum()), int((~t & ~p).sum()))


class PRF(NamedTuple):
    precision: float
    recall: float
    f_measure: float
    zero_division: bool = False


def _prf(tp: int, fp: int, fn: int) -> PRF:
    flag = False
    if tp + fp > 0:
        p = tp / (tp + fp)
    else:
        p, flag = 0.0, True
    if tp + fn > 0:
        r = tp / (tp + fn)
    else:
        r, flag = 0.0, True
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f, flag)


def prf(confusion) -> PRF:
    """Positive-class precision, recall and F; undefined ratios are 0 and flagged.

    >>> [round(v, 4) for v in prf(Confusion(8, 2, 1, 9))[:3]]
    [0.8, 0.8889, 0.8421]
    """
    tp, fp, fn, _ = Confusion(*confusion)
    return _prf(tp, fp, fn)


def weighted_prf(confusion) -> PRF:
    """Support-weighted average of the per-class metrics of both classes.

    Each of P, R and F is averaged separately, so F here is not in general
    the harmonic mean of the averaged P and R.
    """
    tp, fp, fn, tn = Confusion(*confusion)
    pos, neg = _prf(tp, fp, fn), _prf(tn, fn, fp)
    w_pos, w_neg = tp + fn, tn + fp
    total = w_pos + w_neg
    if total == 0:
        return PRF(0.0, 0.0, 0.0, True)
    avg = [(w_pos * a + w_neg * b) / total for a, b in zip(pos[:3], neg[:3])]
    flag = (w_pos > 0 and pos.zero_division) or (w_neg > 0 and neg.zero_division)
    return PRF(*avg, flag)


def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold index per row: each class is shuffled then dealt round-robin.

    The dealing position carries over from one class to the next, so fold
    sizes and per-class fold counts both differ by at most one.
    """
    y = np.asarray(labels)
    n = len(y)
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} folds for only {n} rows")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    pos = 0
    for cls in np.unique(y):
        idx = np.nonzero(y == cls)[0]
        if len(idx) < k:
            logger.warning("class %s has %d rows, fewer than %d folds", cls, len(idx), k)
        idx = rng.permutation(idx)
        folds[idx] = (pos + np.arange(len(idx))) % k
        pos = (pos + len(idx)) % k
    return folds


@dataclass
class FoldResult:
    fold: int
    confusion: Confusion
    n_train: int
    n_test: int
    skipped: bool = False
    reason: str = ""
    state_hash: str = ""


@dataclass
class EvalReport:
    task: str
    model: str
    feature_set: str
    folds: list[FoldResult] = field(default_factory=list)
    predictions: dict[int, tuple[int, float]] = field(default_factory=dict, repr=False)

    @property
    def pooled(self) -> Confusion:
        total = Confusion()
        for f in self.folds:
            if not f.skipped:
                total = total + f.confusion
        return total

    @property
    def positive(self) -> PRF:
        return prf(self.pooled)

    @property
    def weighted(self) -> PRF:
        return weighted_prf(self.pooled)

    @property
    def skipped_folds(self) -> list[int]:
        return [f.fold for f in self.folds if f.skipped]

    def rows(self) -> list[list]:
        """CSV rows: one per fold, then the pooled row."""
        lang, _, cat = self.task.partition(":")
        out = []
        entries = [(str(f.fold), f.confusion, f.skipped) for f in self.folds]
        entries.append(("pooled", self.pooled, False))
        for fold, conf, skipped in entries:
            p, w = prf(conf), weighted_prf(conf)
            out.append([lang, cat, self.model, self.feature_set, fold, *conf,
                        *(f"{v:.6f}" for v in p[:3]), *(f"{v:.6f}" for v in w[:3]),
                        int(p.zero_division), int(skipped)])
        return out


REPORT_HEADER = ["language", "category", "model", "feature_set", "fold", "tp", "fp", "fn", "tn",
                 "precision", "recall", "f_measure", "w_precision", "w_recall", "w_f_measure",
                 "zero_division", "skipped"]


def _state_hash(featurizer: SentenceFeatures, estimator) -> str:
    state = {"columns": [list(c) for c in featurizer.columns()], "model": estimator.to_state()}
    for kind, branch in featurizer.branches_:
        if kind == "TEXT":
            state["vocabulary"] = branch.vocabulary_.to_dict()
    payload = json.dumps(state, sort_keys=True, default=float)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _run_fold(f, texts, y, folds, kind, feature_set, seed, hyperparams, featurizer_args) -> tuple:
    train = np.nonzero(folds != f)[0]
    test = np.nonzero(folds == f)[0]
    counts = np.bincount(y[train], minlength=2)
    if counts.min() < 2:
        msg = f"fold {f}: training part has {counts[1]} positive / {counts[0]} negative rows"
        return FoldResult(f, Confusion(), len(train), len(test), True, msg), None
    featurizer = SentenceFeatures(feature_set, **featurizer_args)
    train_texts = [texts[i] for i in train]
    Xtr = featurizer.fit(train_texts).transform(train_texts)
    est = make_estimator(kind, derive_seed(seed, "fold", f), **hyperparams).fit(Xtr, y[train])
    Xte = featurizer.transform([texts[i] for i in test])
    scores = est.predict_proba(Xte)[:, 1]
    pred = (scores > 0.5).astype(np.int64)
    result = FoldResult(f, Confusion.from_predictions(y[test], pred), len(train), len(test),
                        state_hash=_state_hash(featurizer, est))
    return result, (test, pred, scores)


def evaluate_cv(texts: Sequence[str], labels, kind: str = "forest", feature_set: str = "NLP+TEXT",
                k: int = 10, seed: int = 0, task: str = "", hyperparams: dict | None = None,
                catalog_path=None, stopwords_path=None, language=None, jobs: int = 1) -> EvalReport:
    """Stratified k-fold cross-validation of one binary task.

    Features are refit on each fold's training rows, so held-out sentences
    never shape the vocabulary, idf weights or model.
    """
    kind = parse_model_kind(kind)
    feature_set = parse_feature_set(feature_set)
    texts = list(texts)
    y = np.asarray(labels).astype(np.int64)
    if len(texts) != len(y):
        raise ValueError("texts and labels differ in length")
    folds = stratified_folds(y, k, derive_seed(seed, "folds"))
    args = (texts, y, folds, kind, feature_set, seed, dict(hyperparams or {}),
            {"catalog_path": catalog_path, "stopwords_path": stopwords_path, "language": language})
    if jobs and jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(lambda f: _run_fold(f, *args), range(k)))
    else:
        outcomes = [_run_fold(f, *args) for f in range(k)]
    report = EvalReport(task, kind, feature_set)
    for result, pred in outcomes:
        if result.skipped:
            logger.warning("%s %s %s: %s skipped", task or "task", kind, feature_set, result.reason)
        report.folds.append(result)
        if pred is not None:
            for i, p, s in zip(*pred):
                report.predictions[int(i)] = (int(p), float(s))
    return report


# ---------------------------------------------------------- feature ranking

def _entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def information_gain(feature_col, labels) -> float:
    """Label entropy reduction (bits) from knowing whether the feature is > 0."""
    x = np.asarray(feature_col, dtype=float).ravel() > 0
    y = np.asarray(labels).ravel()
    if len(x) != len(y):
        raise ValueError("feature and labels differ in length")
    if len(y) == 0:
        return 0.0
    classes, yi = np.unique(y, return_inverse=True)
    h = _entropy(np.bincount(yi, minlength=len(classes)))
    for v in (True, False):
        mask = x == v
        if mask.any():
            h -= mask.mean() * _entropy(np.bincount(yi[mask], minlength=len(classes)))
    return max(h, 0.0)


@dataclass
class RankedFeatures:
    entries: list[tuple[str, float]]
    threshold: float

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]


def rank_features(matrix, labels, names: Sequence[str] | None = None, threshold: float = 0.005) -> RankedFeatures:
    """Information gain of each column, kept at ``>= threshold``, best first.

    ``matrix`` may be dense, sparse or a FeatureMatrix (its feature columns
    and task labels are used when ``names``/``labels`` are None).
    """
    if hasattr(matrix, "feature_columns"):
        names = names if names is not None else [c.name for c in matrix.feature_columns]
        labels = matrix.labels() if labels is None else labels
        matrix = matrix.X
    X = sparse.csc_matrix(matrix)
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("empty matrix")
    names = list(names) if names is not None else [str(j) for j in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("names do not match the column count")
    entries = []
    for j in range(X.shape[1]):
        col = X.getcol(j).toarray().ravel()
        ig = information_gain(col, labels)
        if ig >= threshold:
            entries.append((names[j], ig))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return RankedFeatures(entries, threshold)


# ------------------------------------------------------------------ output

def write_report_csv(reports: Sequence[EvalReport], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report_csv_text(reports))


def report_csv_text(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in reports:
        writer.writerows(r.rows())
    return buf.getvalue()


MODEL_LABELS = {"tree": "J48", "naive_bayes": "Naive Bayes", "forest": "Random Forest"}
LANGUAGE_LABELS = {"java": "Java", "python": "Python", "smalltalk": "Smalltalk"}


def summary_table(reports: Sequence[EvalReport]) -> dict:
    """Mean weighted P/R/F over tasks per (language, model, feature set)."""
    acc: dict[tuple, list] = {}
    for r in reports:
        lang = r.task.partition(":")[0]
        acc.setdefault((lang, r.model, r.feature_set), []).append(r.weighted[:3])
    return {key: tuple(float(np.mean([v[i] for v in vals])) for i in range(3)) for key, vals in acc.items()}


def render_table(reports: Sequence[EvalReport]) -> str:
    """Plain-text table: one row per language and model, P/R/F per feature set."""
    table = summary_table(reports)
    sets = ["TEXT", "NLP", "NLP+TEXT"]
    langs = [l for l in LANGUAGE_LABELS if any(k[0] == l for k in table)]
    models = [m for m in MODEL_LABELS if any(k[1] == m for k in table)]
    head1 = f"{'Language':<10} {'ML Model':<14} " + " ".join(f"{s:^20}" for s in sets)
    head2 = f"{'':<10} {'':<14} " + " ".join(f"{'P':>6} {'R':>6} {'F':>6}" for _ in sets)
    lines = [head1, head2, "-" * len(head1)]
    for lang in langs:
        for n, model in enumerate(models):
            cells = []
            for s in sets:
                v = table.get((lang, model, s))
                cells.append(" ".join(f"{x:6.2f}" for x in v) if v else f"{'-':>6} {'-':>6} {'-':>6}")
            label = LANGUAGE_LABELS[lang] if n == 0 else ""
            lines.append(f"{label:<10} {MODEL_LABELS[model]:<14} " + " ".join(cells))
    return "\n".join(lines) + "\n"
