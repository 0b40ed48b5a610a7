"""TEXT features: stop-word removal, iterated Lovins stems and tf-idf weights.

Weights are ``tf * ln(N / df)`` with ``tf`` the raw in-sentence count and
no idf smoothing, so a term present in every training sentence weighs 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._util import DataError, data_path
from .lovins import lovins_stem

__all__ = [
    "Vocabulary", "load_stopwords", "remove_stopwords", "lovins_stem",
    "analyze", "build_tfidf", "tfidf_matrix", "TextFeatures",
]


@lru_cache(maxsize=8)
def _read_stop_file(path: str | None) -> frozenset:
    source = data_path("stopwords.txt") if path is None else None
    try:
        text = source.read_text(encoding="utf-8") if source is not None else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise DataError(f"cannot read stop list {path}: {exc}") from exc
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


def load_stopwords(path=None) -> frozenset:
    """Stop words, one per line (``#`` starts a comment). Defaults to the bundled list."""
    return _read_stop_file(None if path is None else str(path))


def remove_stopwords(tokens: Sequence[str], stopwords: Iterable[str] | None = None) -> list[str]:
    """Drop stop words, keeping the order of the rest.

    >>> remove_stopwords(["the", "class", "is", "deprecated"])
    ['class', 'deprecated']
    """
    stop = load_stopwords() if stopwords is None else stopwords
    return [t for t in tokens if t not in stop]


def analyze(normalized: str, stopwords: Iterable[str] | None = None) -> list[str]:
    """Normalized sentence -> stemmed, stop-word-free tokens."""
    return [lovins_stem(t) for t in remove_stopwords(normalized.split(), stopwords)]


@dataclass
class Vocabulary:
    terms: list[str]
    doc_freq: dict[str, int]
    n_docs: int
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: j for j, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")
        for t in self.terms:
            df = self.doc_freq.get(t, 0)
            if not 1 <= df <= self.n_docs:
                raise ValueError(f"doc_freq[{t!r}] = {df} outside [1, {self.n_docs}]")

    def __len__(self):
        return len(self.terms)

    def idf(self) -> np.ndarray:
        df = np.array([self.doc_freq[t] for t in self.terms], dtype=float)
        return np.log(self.n_docs / df) if len(df) else df

    @classmethod
    def fit(cls, docs: Sequence[Sequence[str]]) -> "Vocabulary":
        terms: list[str] = []
        doc_freq: dict[str, int] = {}
        for doc in docs:
            for t in dict.fromkeys(doc):
                if t not in doc_freq:
                    terms.append(t)
                    doc_freq[t] = 0
                doc_freq[t] += 1
        return cls(terms, doc_freq, len(docs))

    def to_dict(self) -> dict:
        return {"terms": list(self.terms), "doc_freq": [self.doc_freq[t] for t in self.terms],
                "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(list(d["terms"]), dict(zip(d["terms"], d["doc_freq"])), int(d["n_docs"]))


def tfidf_matrix(vocab: Vocabulary, docs: Sequence[Sequence[str]]) -> sparse.csr_matrix:
    """Weight ``docs`` with a fitted vocabulary; unknown terms are ignored."""
    idf = vocab.idf()
    rows, cols, vals = [], [], []
    for i, doc in enumerate(docs):
        counts: dict[int, int] = {}
        for t in doc:
            j = vocab.index.get(t)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            w = counts[j] * idf[j]
            if w != 0.0:
                rows.append(i)
                cols.append(j)
                vals.append(w)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(len(docs), len(vocab)), dtype=float)


def build_tfidf(docs: Sequence[Sequence[str]]) -> tuple[Vocabulary, sparse.csr_matrix]:
    """Fit a vocabulary on ``docs`` and return it with their tf-idf matrix.

    >>> vocab, m = build_tfidf([["cat", "sat"], ["cat", "ran"]])
    >>> round(m[0, vocab.index["sat"]], 4), m[0, vocab.index["cat"]]
    (0.6931, 0.0)
    """
    if not any(len(d) for d in docs):
        raise ValueError("all documents are empty")
    vocab = Vocabulary.fit(docs)
    return vocab, tfidf_matrix(vocab, docs)


class TextFeatures(BaseEstimator, TransformerMixin):
    """tf-idf transformer over normalized sentences.

    Parameters
    ----------
    stopwords_path : path or None
        Replacement stop list; the bundled list when None.
    """

    def __init__(self, stopwords_path=None):
        self.stopwords_path = stopwords_path

    def _analyze_all(self, X) -> list[list[str]]:
        stop = load_stopwords(self.stopwords_path)
        return [analyze(str(s), stop) for s in X]

    def fit(self, X, y=None):
        docs = self._analyze_all(X)
        if not docs:
            raise ValueError("TextFeatures.fit needs at least one sentence")
        self.vocabulary_ = Vocabulary.fit(docs)
        return self

    def transform(self, X) -> sparse.csr_matrix:
        check_is_fitted(self, "vocabulary_")
        return tfidf_matrix(self.vocabulary_, self._analyze_all(X))

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "vocabulary_")
        return np.array(self.vocabulary_.terms, dtype=object)
