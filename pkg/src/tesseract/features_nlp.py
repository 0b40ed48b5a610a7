"""NLP features: shallow predicate-argument heuristics as binary columns.

Each catalog pattern is a positional rule over the tokens of a normalized
sentence, with verbs reduced to a lemma through a small fixed table. No
parser or tagger is involved, so matching is deterministic and total.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._util import DataError, Language, data_path, read_toml

RULE_KINDS = ("verb_initial", "copular_class_for", "passive", "keyword_lead", "contains_sequence")
SUBJECT_PRONOUNS = ("i", "this", "it")
BE_FORMS = ("is", "are", "was", "were")
ANY_VERB = "*"


@lru_cache(maxsize=4)
def _read_lemmas(path: str | None) -> dict[str, str]:
    try:
        text = data_path("lemmas.txt").read_text(encoding="utf-8") if path is None \
            else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise DataError(f"cannot read lemma table {path}: {exc}") from exc
    table = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.lower().split()
        if len(parts) != 2:
            raise DataError(f"{path or 'lemmas.txt'}:{lineno}: expected 'form lemma'")
        table[parts[0]] = parts[1]
    return table


def load_lemmas(path=None) -> dict[str, str]:
    return dict(_read_lemmas(None if path is None else str(path)))


@dataclass(frozen=True)
class Pattern:
    id: str
    template: str
    kind: str
    args: tuple = ()
    language_scope: frozenset = frozenset(Language)

    def to_dict(self) -> dict:
        rule: dict = {"kind": self.kind}
        if self.kind in ("verb_initial", "passive"):
            rule["lemma"] = self.args[0]
        elif self.kind == "keyword_lead":
            rule["word"] = self.args[0]
        elif self.kind == "contains_sequence":
            rule["lemmas"] = list(self.args)
        return {"id": self.id, "template": self.template, "rule": rule,
                "language_scope": sorted(l.value for l in self.language_scope)}


@dataclass(frozen=True)
class PatternCatalog:
    patterns: tuple[Pattern, ...]
    version: str = ""
    lemmas: tuple = ()  # sorted (form, lemma) pairs, hashable

    def __post_init__(self):
        if not self.patterns:
            raise DataError("pattern catalog is empty")
        seen = set()
        for p in self.patterns:
            if p.id in seen:
                raise DataError(f"duplicate pattern id {p.id!r}")
            seen.add(p.id)

    def __len__(self):
        return len(self.patterns)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.patterns]

    @property
    def lemma_table(self) -> dict[str, str]:
        return dict(self.lemmas)


def _parse_pattern(rec: dict, position: int) -> Pattern:
    pid = rec.get("id")
    if not isinstance(pid, str) or not pid:
        raise DataError(f"pattern #{position}: missing id")
    rule = rec.get("rule")
    if not isinstance(rule, dict):
        raise DataError(f"pattern {pid!r}: missing rule table")
    kind = rule.get("kind")
    if kind not in RULE_KINDS:
        raise DataError(f"pattern {pid!r}: unknown rule kind {kind!r}")
    extra = set(rule) - {"kind", "lemma", "word", "lemmas"}
    if extra:
        raise DataError(f"pattern {pid!r}: unexpected rule keys {sorted(extra)}")

    def word_arg(key):
        value = rule.get(key)
        if not isinstance(value, str) or not value.strip() or len(value.split()) != 1:
            raise DataError(f"pattern {pid!r}: {kind} needs a single-word {key!r}")
        return (value.strip().lower(),)

    if kind in ("verb_initial", "passive"):
        args = word_arg("lemma")
        if kind == "passive" and args[0] == ANY_VERB:
            raise DataError(f"pattern {pid!r}: passive does not accept '*'")
    elif kind == "keyword_lead":
        args = word_arg("word")
    elif kind == "contains_sequence":
        seq = rule.get("lemmas")
        if not isinstance(seq, list) or not seq or not all(isinstance(s, str) and s.strip() for s in seq):
            raise DataError(f"pattern {pid!r}: contains_sequence needs a non-empty 'lemmas' list")
        args = tuple(s.strip().lower() for s in seq)
    else:
        args = ()
    scope = rec.get("language_scope")
    try:
        langs = frozenset(Language) if scope is None else frozenset(Language.parse(s) for s in scope)
    except (TypeError, ValueError) as exc:
        raise DataError(f"pattern {pid!r}: bad language_scope ({exc})") from None
    if not langs:
        raise DataError(f"pattern {pid!r}: empty language_scope")
    return Pattern(pid, str(rec.get("template", pid)), kind, args, langs)


def load_catalog(path=None, lemmas_path=None) -> PatternCatalog:
    """Read and validate a pattern catalog; the bundled one when ``path`` is None."""
    raw = read_toml(path if path is not None else data_path("patterns.toml"))
    records = raw.get("pattern", [])
    if not isinstance(records, list):
        raise DataError("'pattern' must be an array of tables")
    patterns = tuple(_parse_pattern(rec, k) for k, rec in enumerate(records))
    lemmas = tuple(sorted(load_lemmas(lemmas_path).items()))
    return PatternCatalog(patterns, str(raw.get("version", "")), lemmas)


# ----------------------------------------------------------------- matching

def _verb_position(tokens: Sequence[str]) -> int:
    return 1 if len(tokens) > 1 and tokens[0] in SUBJECT_PRONOUNS else 0


def _copular_class_for(tokens: Sequence[str]) -> bool:
    for k in range(len(tokens) - 1):
        if tokens[k] == "is" and tokens[k + 1] in ("a", "an"):
            for m in range(k + 2, len(tokens) - 2):
                if tokens[m] == "class" and tokens[m + 1] == "for":
                    return True
    return False


def _contains(seq: Sequence[str], sub: Sequence[str]) -> bool:
    n = len(sub)
    return any(tuple(seq[i:i + n]) == tuple(sub) for i in range(len(seq) - n + 1))


def pattern_fires(pattern: Pattern, tokens: Sequence[str], lemmas: Sequence[str], verbs) -> bool:
    """Evaluate one rule on a token list and its parallel lemma list."""
    if not tokens:
        return False
    kind, args = pattern.kind, pattern.args
    if kind == "verb_initial":
        lemma = lemmas[_verb_position(tokens)]
        return lemma in verbs if args[0] == ANY_VERB else lemma == args[0]
    if kind == "passive":
        return any(tokens[k] in BE_FORMS and lemmas[k + 1] == args[0] for k in range(len(tokens) - 1))
    if kind == "copular_class_for":
        return _copular_class_for(tokens)
    if kind == "keyword_lead":
        return tokens[0] == args[0]
    if kind == "contains_sequence":
        return _contains(lemmas, args)
    raise AssertionError(f"unhandled rule kind {kind}")


def match_patterns(sentence_normalized: str, catalog: PatternCatalog, language=None) -> np.ndarray:
    """One 0/1 entry per catalog pattern, in catalog order.

    Patterns scoped away from ``language`` are 0; with ``language=None``
    every pattern is evaluated.
    """
    table = catalog.lemma_table
    verbs = set(table.values()) - {"be"}
    tokens = sentence_normalized.split()
    lemmas = [table.get(t, t) for t in tokens]
    lang = None if language is None else Language.parse(language)
    out = np.zeros(len(catalog), dtype=np.int8)
    for j, p in enumerate(catalog.patterns):
        if lang is not None and lang not in p.language_scope:
            continue
        out[j] = pattern_fires(p, tokens, lemmas, verbs)
    return out


def feature_columns(catalog: PatternCatalog) -> list[tuple[str, str]]:
    """Column manifest entries ``(kind, name)`` for the catalog, in catalog order."""
    return [("NLP", p.id) for p in catalog.patterns]


class PatternFeatures(BaseEstimator, TransformerMixin):
    """Binary pattern-presence transformer over normalized sentences.

    Parameters
    ----------
    catalog_path : path or None
        Pattern catalog file; the bundled catalog when None.
    language : str or None
        Language of the sentences, used for scoped patterns.
    """

    def __init__(self, catalog_path=None, language=None):
        self.catalog_path = catalog_path
        self.language = language

    def fit(self, X=None, y=None):
        self.catalog_ = load_catalog(self.catalog_path)
        return self

    def transform(self, X) -> sparse.csr_matrix:
        check_is_fitted(self, "catalog_")
        rows = [match_patterns(str(s), self.catalog_, self.language) for s in X]
        dense = np.vstack(rows) if rows else np.zeros((0, len(self.catalog_)), dtype=np.int8)
        return sparse.csr_matrix(dense.astype(float))

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_is_fitted(self, "catalog_")
        return np.array(self.catalog_.ids, dtype=object)
