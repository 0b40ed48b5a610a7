"""Ground-truth sentences, text normalization and the comment-type taxonomy."""
from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from ._util import DataError, Language, data_path, read_toml

GROUND_TRUTH_HEADER = ["comment_id", "project", "language", "sentence", "categories"]
ABBREVIATIONS = ("e.g.", "i.e.", "etc.", "vs.")
MAPPING_KINDS = ("exact", "partial", "new")


@dataclass(frozen=True)
class Category:
    language: Language
    id: str
    name: str
    provenance: str  # existing | new
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class Mapping:
    source: tuple[Language, str]
    target: tuple[Language, str]
    kind: str


@dataclass
class Taxonomy:
    categories: dict[Language, list[Category]]
    mappings: list[Mapping] = field(default_factory=list)
    version: str = ""

    def __post_init__(self):
        self._lookup: dict[tuple[Language, str], str] = {}
        for lang, cats in self.categories.items():
            for cat in cats:
                for key in (cat.id, cat.name, *cat.aliases):
                    self._lookup[(lang, key.casefold())] = cat.id
        known = {(lang, c.id) for lang, cats in self.categories.items() for c in cats}
        for m in self.mappings:
            for end in (m.source, m.target):
                if end not in known:
                    raise DataError(f"mapping endpoint {end[0].value}:{end[1]} is not a registered category")
            if m.kind not in MAPPING_KINDS:
                raise DataError(f"unknown mapping kind {m.kind!r}")

    def category_ids(self, language) -> list[str]:
        return [c.id for c in self.categories.get(Language.parse(language), [])]

    def resolve(self, language, name: str) -> str:
        lang = Language.parse(language)
        try:
            return self._lookup[(lang, name.strip().casefold())]
        except KeyError:
            raise DataError(f"unknown {lang.value} category {name!r}") from None

    def mapped(self, language, category: str) -> list[Mapping]:
        key = (Language.parse(language), category)
        return [m for m in self.mappings if m.source == key or m.target == key]


def _endpoint(text: str) -> tuple[Language, str]:
    lang, sep, cat = text.partition(":")
    if not sep:
        raise DataError(f"mapping endpoint {text!r} must look like 'language:Category'")
    return Language.parse(lang), cat.strip()


def load_taxonomy(path=None) -> Taxonomy:
    """Read a taxonomy file of ``[[category]]`` and ``[[mapping]]`` records.

    Without a path the bundled model is loaded.
    """
    raw = read_toml(path if path is not None else data_path("cctm.toml"))
    categories: dict[Language, list[Category]] = {}
    seen = set()
    for rec in raw.get("category", []):
        try:
            lang = Language.parse(rec["language"])
            cid = str(rec["id"])
        except (KeyError, ValueError) as exc:
            raise DataError(f"bad category record {rec!r}: {exc}") from exc
        if (lang, cid) in seen:
            raise DataError(f"duplicate category {lang.value}:{cid}")
        seen.add((lang, cid))
        provenance = rec.get("provenance", "existing")
        if provenance not in ("existing", "new"):
            raise DataError(f"category {cid}: provenance must be 'existing' or 'new'")
        categories.setdefault(lang, []).append(
            Category(lang, cid, rec.get("name", cid), provenance, tuple(rec.get("aliases", ())))
        )
    mappings = []
    for rec in raw.get("mapping", []):
        try:
            mappings.append(Mapping(_endpoint(rec["from"]), _endpoint(rec["to"]), rec["kind"]))
        except KeyError as exc:
            raise DataError(f"bad mapping record {rec!r}") from exc
    if not categories:
        raise DataError("taxonomy has no categories")
    return Taxonomy(categories, mappings, str(raw.get("version", "")))


# ---------------------------------------------------------------- sentences

_TERMINATOR = re.compile(r"[.!?]+(?=[ \t]*\n|[ \t]*$|\s+[A-Z])")


def _split_at_terminators(segment: str) -> list[str]:
    pieces, start = [], 0
    for m in _TERMINATOR.finditer(segment):
        words = segment[start:m.end()].split()
        if words and words[-1].lower().endswith(ABBREVIATIONS):
            continue
        pieces.append(segment[start:m.end()])
        start = m.end()
    pieces.append(segment[start:])
    return [" ".join(p.split()) for p in pieces if p.strip()]


def split_sentences(comment_text: str) -> list[str]:
    """Rule-based sentence splitter for comment text.

    Breaks at blank lines, after a line ending in ``:`` that is followed by
    more text, and after ``.``/``!``/``?`` when the next text starts with an
    upper-case letter or a new line. Common abbreviations never break.
    """
    text = comment_text.replace("\r\n", "\n").replace("\r", "\n")
    sentences = []
    for block in re.split(r"\n[ \t]*\n", text):
        lines = [ln.strip() for ln in block.split("\n") if ln.strip()]
        segment: list[str] = []
        for k, line in enumerate(lines):
            segment.append(line)
            if line.endswith(":") and k + 1 < len(lines):
                sentences.extend(_split_at_terminators("\n".join(segment)))
                segment = []
        if segment:
            sentences.extend(_split_at_terminators("\n".join(segment)))
    return sentences


_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize(sentence: str) -> str:
    """Lower-case, turn every non-alphanumeric character into a space, squeeze.

    >>> normalize("@author Vaadin Ltd.")
    'author vaadin ltd'
    """
    return _NON_ALNUM.sub(" ", sentence.lower()).strip()


@dataclass(frozen=True)
class LabeledSentence:
    sentence_id: str
    comment_id: str
    index: int
    raw: str
    normalized: str
    labels: frozenset = frozenset()
    language: Language = Language.JAVA
    project: str = ""

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "comment_id": self.comment_id,
            "index": self.index,
            "raw": self.raw,
            "normalized": self.normalized,
            "labels": sorted(self.labels),
            "language": self.language.value,
            "project": self.project,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LabeledSentence":
        return cls(d["sentence_id"], d["comment_id"], int(d["index"]), d["raw"], d["normalized"],
                   frozenset(d.get("labels", ())), Language.parse(d["language"]), d.get("project", ""))


@dataclass(frozen=True)
class CategoryTask:
    language: Language
    category: str
    positive_count: int

    @property
    def name(self) -> str:
        return f"{self.language.value}:{self.category}"

    @property
    def trainable(self) -> bool:
        return self.positive_count >= 40


def load_ground_truth(csv_path, taxonomy: Taxonomy | None = None) -> list[LabeledSentence]:
    """Read a manually labeled sentence CSV (``categories`` is ``;``-separated)."""
    taxonomy = taxonomy or load_taxonomy()
    out: list[LabeledSentence] = []
    seen: set[tuple[str, str]] = set()
    per_comment: Counter = Counter()
    with open(csv_path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != GROUND_TRUTH_HEADER:
            raise DataError(f"{csv_path}: header must be {','.join(GROUND_TRUTH_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not any(cell.strip() for cell in row):
                continue
            if len(row) != len(GROUND_TRUTH_HEADER):
                raise DataError(f"{csv_path}:{line}: expected {len(GROUND_TRUTH_HEADER)} fields, got {len(row)}")
            comment_id, project, language, sentence, categories = row
            try:
                lang = Language.parse(language)
                labels = frozenset(
                    taxonomy.resolve(lang, c) for c in categories.split(";") if c.strip()
                )
            except (DataError, ValueError) as exc:
                raise DataError(f"{csv_path}:{line}: {exc}") from None
            key = (comment_id, sentence)
            if key in seen:
                raise DataError(f"{csv_path}:{line}: duplicate sentence for comment {comment_id!r}")
            seen.add(key)
            index = per_comment[comment_id]
            per_comment[comment_id] += 1
            out.append(LabeledSentence(
                sentence_id=f"{comment_id}#{index}",
                comment_id=comment_id,
                index=index,
                raw=sentence,
                normalized=normalize(sentence),
                labels=labels,
                language=lang,
                project=project,
            ))
    return out


def save_ground_truth(sentences: Iterable[LabeledSentence], csv_path) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GROUND_TRUTH_HEADER)
        for s in sentences:
            writer.writerow([s.comment_id, s.project, s.language.value, s.raw, ";".join(sorted(s.labels))])


def sentences_from_comments(comments) -> list[LabeledSentence]:
    """Unlabeled sentences of extracted class comments, ready for prediction."""
    out = []
    for c in comments:
        for k, sent in enumerate(split_sentences(c.raw_text)):
            out.append(LabeledSentence(f"{c.id}#{k}", c.id, k, sent, normalize(sent),
                                       frozenset(), c.language, c.project))
    return out


def category_tasks(sentences: Sequence[LabeledSentence], min_count: int = 40) -> list[CategoryTask]:
    """One binary task per (language, category) with at least ``min_count`` positives."""
    if not sentences:
        raise ValueError("no sentences")
    counts: Counter = Counter()
    for s in sentences:
        for label in s.labels:
            counts[(s.language, label)] += 1
    tasks = [CategoryTask(lang, cat, n) for (lang, cat), n in counts.items() if n >= max(min_count, 1)]
    tasks.sort(key=lambda t: (-t.positive_count, t.language.value, t.category))
    return tasks


def write_sentences(sentences: Iterable[LabeledSentence], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")


def read_sentences(path) -> list[LabeledSentence]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(LabeledSentence.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise DataError(f"{path}:{lineno}: bad sentence record ({exc})") from exc
    return out
