"""Sentence x feature matrix with a column manifest, and its text file format.

File layout::

    #rows 3
    #cols 4
    #col 0,NLP,represents_something
    #col 1,TEXT,widget
    #col 2,LABEL,java:Summary
    #row 0,3f2a9c1b0d4e5f60#0
    0,0,1.0
    0,2,1.0

Body lines are ``row,col,value`` for non-zero entries only.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._util import DataError, Language
from .corpus import CategoryTask, LabeledSentence
from .features_nlp import PatternFeatures
from .features_text import TextFeatures

COLUMN_KINDS = ("TEXT", "NLP", "LABEL")
FEATURE_SETS = ("TEXT", "NLP", "NLP+TEXT")
_FEATURE_SET_ALIASES = {"text": "TEXT", "nlp": "NLP", "both": "NLP+TEXT", "nlp+text": "NLP+TEXT",
                        "text+nlp": "NLP+TEXT"}


def parse_feature_set(value: str) -> str:
    try:
        return _FEATURE_SET_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown feature set {value!r} (expected text, nlp or both)") from None


class Column(NamedTuple):
    kind: str
    name: str


def manifest_hash(columns: Sequence[Column]) -> str:
    payload = json.dumps([list(c) for c in columns], separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class FeatureMatrix:
    row_ids: list[str]
    columns: list[Column]
    values: sparse.csr_matrix
    task: CategoryTask | None = None

    def __post_init__(self):
        self.columns = [Column(*c) for c in self.columns]
        self.values = sparse.csr_matrix(self.values, dtype=float)
        self.values.eliminate_zeros()
        if self.values.shape != (len(self.row_ids), len(self.columns)):
            raise ValueError(f"values shape {self.values.shape} does not match "
                             f"{len(self.row_ids)} rows x {len(self.columns)} columns")
        bad = [c for c in self.columns if c.kind not in COLUMN_KINDS]
        if bad:
            raise ValueError(f"unknown column kind {bad[0].kind!r}")
        for j in self._indices("LABEL"):
            col = self.values[:, j].toarray().ravel()
            if not np.isin(col, (0.0, 1.0)).all():
                raise ValueError(f"LABEL column {self.columns[j].name!r} is not 0/1")

    def _indices(self, *kinds) -> list[int]:
        return [j for j, c in enumerate(self.columns) if c.kind in kinds]

    @property
    def feature_columns(self) -> list[Column]:
        return [self.columns[j] for j in self._indices("TEXT", "NLP")]

    @property
    def label_names(self) -> list[str]:
        return [self.columns[j].name for j in self._indices("LABEL")]

    @property
    def X(self) -> sparse.csr_matrix:
        return self.values[:, self._indices("TEXT", "NLP")]

    def labels(self, name: str | None = None) -> np.ndarray:
        names = self.label_names
        if name is None:
            if self.task is not None and self.task.name in names:
                name = self.task.name
            elif len(names) == 1:
                name = names[0]
            else:
                raise ValueError(f"matrix has {len(names)} label columns; name one")
        j = self.columns.index(Column("LABEL", name))
        return self.values[:, j].toarray().ravel().astype(np.int64)

    def manifest_hash(self) -> str:
        return manifest_hash(self.feature_columns)

    def select(self, kinds: Sequence[str]) -> "FeatureMatrix":
        """Keep feature columns of the given kinds, plus every LABEL column."""
        keep = self._indices(*kinds, "LABEL")
        return FeatureMatrix(list(self.row_ids), [self.columns[j] for j in keep],
                             self.values[:, keep], self.task)

    # ------------------------------------------------------------ text format
    def to_text(self) -> str:
        out = [f"#rows {len(self.row_ids)}", f"#cols {len(self.columns)}"]
        out += [f"#col {j},{c.kind},{c.name}" for j, c in enumerate(self.columns)]
        out += [f"#row {i},{rid}" for i, rid in enumerate(self.row_ids)]
        coo = self.values.tocoo()
        order = np.lexsort((coo.col, coo.row))
        out += [f"{coo.row[k]},{coo.col[k]},{float(coo.data[k])!r}" for k in order]
        return "\n".join(out) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str, source: str = "<text>") -> "FeatureMatrix":
        n_rows = n_cols = None
        columns: dict[int, Column] = {}
        row_ids: dict[int, str] = {}
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            try:
                if line.startswith("#rows "):
                    n_rows = int(line[6:])
                elif line.startswith("#cols "):
                    n_cols = int(line[6:])
                elif line.startswith("#col "):
                    idx, kind, name = line[5:].split(",", 2)
                    columns[int(idx)] = Column(kind.strip(), name)
                elif line.startswith("#row "):
                    idx, rid = line[5:].split(",", 1)
                    row_ids[int(idx)] = rid
                elif line.startswith("#"):
                    continue
                else:
                    r, c, v = line.split(",")
                    rows.append(int(r))
                    cols.append(int(c))
                    vals.append(float(v))
            except ValueError:
                raise DataError(f"{source}:{lineno}: malformed line {line!r}") from None
        if n_rows is None or n_cols is None:
            raise DataError(f"{source}: missing #rows/#cols header")
        if sorted(columns) != list(range(n_cols)):
            raise DataError(f"{source}: column manifest does not cover 0..{n_cols - 1}")
        if rows and (max(rows) >= n_rows or max(cols) >= n_cols or min(rows) < 0 or min(cols) < 0):
            raise DataError(f"{source}: entry index out of range")
        ids = [row_ids.get(i, str(i)) for i in range(n_rows)]
        values = sparse.csr_matrix((vals, (rows, cols)), shape=(n_rows, n_cols))
        manifest = [columns[j] for j in range(n_cols)]
        task = None
        labels = [c.name for c in manifest if c.kind == "LABEL"]
        try:
            matrix = cls(ids, manifest, values)
            if len(labels) == 1 and ":" in labels[0]:
                lang, cat = labels[0].split(":", 1)
                matrix.task = CategoryTask(Language.parse(lang), cat, int(matrix.labels().sum()))
        except ValueError as exc:
            raise DataError(f"{source}: {exc}") from None
        return matrix

    @classmethod
    def read(cls, path) -> "FeatureMatrix":
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"cannot read matrix {path}: {exc}") from exc
        return cls.from_text(text, str(path))


class SentenceFeatures(BaseEstimator, TransformerMixin):
    """NLP and/or TEXT columns for normalized sentences.

    With both branches, NLP columns come first.

    Parameters
    ----------
    feature_set : {"TEXT", "NLP", "NLP+TEXT"}
        Branches to compute; ``text``/``nlp``/``both`` are accepted.
    catalog_path, stopwords_path : path or None
        Override the bundled pattern catalog and stop list.
    language : str or None
        Language of the sentences, for language-scoped patterns.
    """

    def __init__(self, feature_set: str = "NLP+TEXT", catalog_path=None, stopwords_path=None, language=None):
        self.feature_set = feature_set
        self.catalog_path = catalog_path
        self.stopwords_path = stopwords_path
        self.language = language

    def fit(self, X, y=None):
        fs = parse_feature_set(self.feature_set)
        self.branches_ = []
        if "NLP" in fs:
            self.branches_.append(("NLP", PatternFeatures(self.catalog_path, self.language).fit(X)))
        if "TEXT" in fs:
            self.branches_.append(("TEXT", TextFeatures(self.stopwords_path).fit(X)))
        return self

    def transform(self, X) -> sparse.csr_matrix:
        check_is_fitted(self, "branches_")
        X = list(X)
        blocks = [branch.transform(X) for _, branch in self.branches_]
        return sparse.hstack(blocks, format="csr") if blocks else sparse.csr_matrix((len(X), 0))

    def columns(self) -> list[Column]:
        check_is_fitted(self, "branches_")
        return [Column(kind, str(name)) for kind, branch in self.branches_
                for name in branch.get_feature_names_out()]

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        return np.array([c.name for c in self.columns()], dtype=object)


def task_labels(sentences: Sequence[LabeledSentence], task: CategoryTask) -> np.ndarray:
    return np.array([int(task.category in s.labels) for s in sentences], dtype=np.int64)


def build_matrix(sentences: Sequence[LabeledSentence], task: CategoryTask | None,
                 feature_set: str = "NLP+TEXT", catalog_path=None, stopwords_path=None) -> FeatureMatrix:
    """Featurize sentences (vocabulary fit on all of them) and append the task's LABEL column."""
    if not sentences:
        raise ValueError("no sentences to featurize")
    language = task.language if task is not None else sentences[0].language
    feats = SentenceFeatures(feature_set, catalog_path, stopwords_path, language.value)
    texts = [s.normalized for s in sentences]
    values = feats.fit(texts).transform(texts)
    columns = feats.columns()
    if task is not None:
        y = task_labels(sentences, task)
        values = sparse.hstack([values, sparse.csr_matrix(y[:, None].astype(float))], format="csr")
        columns.append(Column("LABEL", task.name))
    return FeatureMatrix([s.sentence_id for s in sentences], columns, values, task)
