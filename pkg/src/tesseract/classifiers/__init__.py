"""Binary per-task classifiers and the trained-model wrapper."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._util import DataError
from ._base import DegenerateTaskError
from .forest import RandomForest, log2_features
from .naive_bayes import GaussianNaiveBayes
from .tree import C45Classifier, add_errors

__all__ = [
    "GaussianNaiveBayes", "C45Classifier", "RandomForest", "DegenerateTaskError",
    "ManifestMismatch", "Model", "MODEL_KINDS", "parse_model_kind", "make_estimator",
    "train", "predict", "add_errors", "log2_features",
]

MODEL_FORMAT_VERSION = 1
MODEL_KINDS = {"naive_bayes": GaussianNaiveBayes, "tree": C45Classifier, "forest": RandomForest}
_KIND_ALIASES = {"nb": "naive_bayes", "naive_bayes": "naive_bayes", "j48": "tree", "tree": "tree",
                 "c45": "tree", "rf": "forest", "forest": "forest"}


def parse_model_kind(value: str) -> str:
    try:
        return _KIND_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown model {value!r} (expected nb, j48 or rf)") from None


def make_estimator(kind: str, seed: int = 0, **hyperparams):
    kind = parse_model_kind(kind)
    if kind in ("forest", "tree"):
        hyperparams.setdefault("random_state", seed)
    return MODEL_KINDS[kind](**hyperparams)


class ManifestMismatch(ValueError):
    def __init__(self, missing: Sequence, extra: Sequence):
        self.missing = list(missing)
        self.extra = list(extra)
        parts = []
        if self.missing:
            parts.append("missing columns: " + ", ".join(f"{k}:{n}" for k, n in self.missing))
        if self.extra:
            parts.append("extra columns: " + ", ".join(f"{k}:{n}" for k, n in self.extra))
        super().__init__("; ".join(parts) or "column order differs from the training manifest")


@dataclass
class Model:
    kind: str
    estimator: object
    columns: list = field(default_factory=list)  # [(kind, name)] of the training features
    task: str = ""
    seed: int = 0

    @property
    def manifest_hash(self) -> str:
        from ..matrix import manifest_hash
        return manifest_hash(self.columns)

    def check_columns(self, columns: Sequence) -> None:
        want = [tuple(c) for c in self.columns]
        got = [tuple(c) for c in columns]
        if want != got:
            ws, gs = set(want), set(got)
            raise ManifestMismatch([c for c in want if c not in gs], [c for c in got if c not in ws])

    def predict(self, X, columns: Sequence | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Labels and positive-class scores for the rows of ``X``."""
        if columns is not None:
            self.check_columns(columns)
        X = np.atleast_2d(X) if not hasattr(X, "tocsr") else X
        scores = self.estimator.predict_proba(X)[:, 1]
        return (scores > 0.5).astype(np.int64), scores

    def to_json(self) -> str:
        return json.dumps({
            "format_version": MODEL_FORMAT_VERSION,
            "kind": self.kind,
            "task": self.task,
            "seed": self.seed,
            "manifest_hash": self.manifest_hash,
            "columns": [list(c) for c in self.columns],
            "state": self.estimator.to_state(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Model":
        try:
            data = json.loads(text)
            if data.get("format_version") != MODEL_FORMAT_VERSION:
                raise DataError(f"unsupported model format {data.get('format_version')!r}")
            kind = parse_model_kind(data["kind"])
            est = MODEL_KINDS[kind].from_state(data["state"])
            model = cls(kind, est, [tuple(c) for c in data["columns"]], data.get("task", ""), int(data["seed"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad model file: {exc}") from exc
        if model.manifest_hash != data.get("manifest_hash"):
            raise DataError("model manifest hash does not match its columns")
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Model":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise DataError(f"cannot read model {path}: {exc}") from exc


def train(matrix, kind: str, hyperparams: dict | None = None, seed: int = 0) -> Model:
    """Fit a classifier on a FeatureMatrix's features and task label."""
    kind = parse_model_kind(kind)
    y = matrix.labels()
    est = make_estimator(kind, seed, **(hyperparams or {})).fit(matrix.X, y)
    task = matrix.task.name if matrix.task is not None else (matrix.label_names or [""])[0]
    return Model(kind, est, [tuple(c) for c in matrix.feature_columns], task, seed)


def predict(model: Model, feature_row, columns: Sequence | None = None) -> tuple[int, float]:
    """Label and score for a single feature row."""
    labels, scores = model.predict(np.asarray(feature_row, dtype=float).reshape(1, -1), columns)
    return int(labels[0]), float(scores[0])
