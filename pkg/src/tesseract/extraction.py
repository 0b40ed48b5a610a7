"""Class comment extraction for Java, Python and Tonel-format Smalltalk sources.

Each extractor is a small lexer that only understands what it needs:
string and comment literals, bracket depth and declaration heads. Files do
not have to parse; partially broken sources still yield their comments.
"""
from __future__ import annotations

import hashlib
import inspect
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from ._util import DataError, Language

logger = logging.getLogger(__name__)

SOURCE_KINDS = ("javadoc", "block", "docstring", "hash_block", "tonel_header")
EXTENSIONS = {Language.JAVA: ".java", Language.PYTHON: ".py", Language.SMALLTALK: ".st"}


class ExtractionError(DataError):
    def __init__(self, message: str, file_path: str = "", offset: int | None = None, line: int | None = None):
        self.file_path = file_path
        self.offset = offset
        self.line = line
        where = file_path or "<text>"
        if offset is not None:
            where += f" @ byte {offset}"
        if line is not None:
            where += f" line {line}"
        super().__init__(f"{where}: {message}")


@dataclass
class ClassComment:
    id: str
    project: str
    language: Language
    class_name: str
    file_path: str
    raw_text: str
    line_count: int
    sources: list[str]
    # per-carrier texts, joined with newlines they give raw_text; not serialized
    segments: list[str] = field(default_factory=list, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "project": self.project,
            "language": self.language.value,
            "class_name": self.class_name,
            "file_path": self.file_path,
            "raw_text": self.raw_text,
            "line_count": self.line_count,
            "sources": list(self.sources),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassComment":
        try:
            raw = data["raw_text"]
            comment = cls(
                id=str(data["id"]),
                project=str(data["project"]),
                language=Language.parse(data["language"]),
                class_name=str(data["class_name"]),
                file_path=str(data["file_path"]),
                raw_text=raw,
                line_count=int(data["line_count"]),
                sources=list(data["sources"]),
                segments=[raw],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"bad ClassComment record: {exc}") from exc
        if not raw or comment.line_count != len(raw.split("\n")):
            raise DataError(f"ClassComment {comment.id}: raw_text/line_count mismatch")
        return comment


@dataclass
class CorpusStats:
    project: str
    language: Language
    n_classes: int = 0
    n_commented: int = 0

    def to_dict(self) -> dict:
        return {"project": self.project, "language": self.language.value,
                "n_classes": self.n_classes, "n_commented": self.n_commented}


class _Decl(NamedTuple):
    name: str
    ordinal: int
    carriers: list  # [(source_kind, text)]


def _trim_lines(lines: Iterable[str]) -> str:
    lines = [ln.rstrip() for ln in lines]
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return "\n".join(lines)


def _make_comment(decl: _Decl, language: Language, file_path: str, project: str) -> ClassComment | None:
    carriers = [(kind, text) for kind, text in decl.carriers if text]
    if not carriers:
        return None
    raw = "\n".join(text for _, text in carriers)
    digest = hashlib.sha1(
        "\0".join([language.value, file_path, decl.name, str(decl.ordinal), raw]).encode("utf-8")
    ).hexdigest()[:16]
    return ClassComment(
        id=digest,
        project=project,
        language=language,
        class_name=decl.name,
        file_path=file_path,
        raw_text=raw,
        line_count=len(raw.split("\n")),
        sources=[kind for kind, _ in carriers],
        segments=[text for _, text in carriers],
    )


# --------------------------------------------------------------------- Java

_JAVA_MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract",
    "sealed", "non", "strictfp",
}
_JAVA_DECL = {"class", "interface", "enum", "record"}
_GUTTER = re.compile(r"^\s*\*+")


class _Tok(NamedTuple):
    kind: str  # ident | op | comment | line_comment | string | num
    value: object
    start: int


def _java_tokens(text: str, file_path: str) -> list[_Tok]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            toks.append(_Tok("line_comment", text[i + 2:j], i))
            i = j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise ExtractionError("unterminated comment", file_path, offset=len(text[:i].encode("utf-8")))
            if text.startswith("/**", i) and not text.startswith("/**/", i):
                toks.append(_Tok("comment", ("javadoc", text[i + 3:j]), i))
            else:
                toks.append(_Tok("comment", ("block", text[i + 2:j]), i))
            i = j + 2
        elif text.startswith('"""', i):
            j = i + 3
            while j < n and not text.startswith('"""', j):
                j += 2 if text[j] == "\\" else 1
            toks.append(_Tok("string", None, i))
            i = min(j + 3, n)
        elif c in "\"'":
            j = i + 1
            while j < n and text[j] != c and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            toks.append(_Tok("string", None, i))
            i = j + 1
        elif c.isalpha() or c in "_$":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_$"):
                j += 1
            toks.append(_Tok("ident", text[i:j], i))
            i = j
        elif c.isdigit():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "._"):
                j += 1
            toks.append(_Tok("num", text[i:j], i))
            i = j
        else:
            toks.append(_Tok("op", c, i))
            i += 1
    return toks


def _clean_java_comment(body: str) -> str:
    lines = body.split("\n")
    out = []
    for k, line in enumerate(lines):
        line = _GUTTER.sub("", line).strip()
        if k == len(lines) - 1:
            line = line.rstrip("*").rstrip()
        out.append(line)
    return _trim_lines(out)


def _skip_annotation_back(toks: list[_Tok], p: int) -> int | None:
    """If an annotation ends at index ``p``, return the index before its '@'."""
    if toks[p].kind == "op" and toks[p].value == ")":
        depth = 0
        q = p
        while q >= 0:
            t = toks[q]
            if t.kind == "op" and t.value == ")":
                depth += 1
            elif t.kind == "op" and t.value == "(":
                depth -= 1
                if depth == 0:
                    break
            q -= 1
        p = q - 1
        if p < 0:
            return None
    if toks[p].kind != "ident":
        return None
    r = p
    while r >= 2 and toks[r - 1].kind == "op" and toks[r - 1].value == "." and toks[r - 2].kind == "ident":
        r -= 2
    if r >= 1 and toks[r - 1].kind == "op" and toks[r - 1].value == "@":
        return r - 2
    return None


def _java_declarations(text: str, file_path: str = "", include_nested: bool = False) -> list[_Decl]:
    toks = _java_tokens(text, file_path)
    decls = []
    depth = 0
    for j, tok in enumerate(toks):
        if tok.kind == "op":
            if tok.value == "{":
                depth += 1
            elif tok.value == "}":
                depth = max(depth - 1, 0)
            continue
        if tok.kind != "ident" or tok.value not in _JAVA_DECL:
            continue
        if depth > 0 and not include_nested:
            continue
        prev = toks[j - 1] if j > 0 else None
        nxt = toks[j + 1] if j + 1 < len(toks) else None
        if nxt is None or nxt.kind != "ident":
            continue
        if prev is not None and prev.kind == "op" and prev.value in ".:":
            continue
        if tok.value == "record":
            after = toks[j + 2] if j + 2 < len(toks) else None
            if after is None or after.kind != "op" or after.value not in "(<":
                continue
        p = j - 1
        if prev is not None and prev.kind == "op" and prev.value == "@" and tok.value == "interface":
            p = j - 2
        while p >= 0:
            t = toks[p]
            if t.kind == "ident" and t.value in _JAVA_MODIFIERS:
                p -= 1
            elif t.kind == "op" and t.value == "-" and p > 0 and toks[p - 1].value == "non":
                p -= 1
            else:
                q = _skip_annotation_back(toks, p)
                if q is None:
                    break
                p = q
        stacked = []
        while p >= 0 and toks[p].kind == "comment":
            stacked.append(toks[p].value)
            p -= 1
        stacked.reverse()
        carriers = [(kind, _clean_java_comment(body)) for kind, body in stacked]
        decls.append(_Decl(nxt.value, len(decls), carriers))
    return decls


def extract_java(file_text: str, file_path: str = "", project: str = "",
                 include_nested: bool = False) -> list[ClassComment]:
    """Class comments of the type declarations in a Java compilation unit.

    Block and Javadoc comments stacked directly above a declaration (only
    annotations and modifiers may sit in between) are joined in file order.
    Line comments are never class comments.
    """
    out = []
    for decl in _java_declarations(file_text, file_path, include_nested):
        comment = _make_comment(decl, Language.JAVA, file_path, project)
        if comment is not None:
            out.append(comment)
    return out


# ------------------------------------------------------------------- Python

_STRING_START = re.compile(r"(?i)(?:[rbuf]{0,2})('''|\"\"\"|'|\")")
_CODING = re.compile(r"^[ \t\f]*#.*?coding[:=][ \t]*[-\w.]+")


class _PyTok(NamedTuple):
    kind: str  # NAME | STRING | OP | NUM
    value: str
    line: int
    col: int


def _py_lex(text: str, file_path: str):
    """Split Python source into logical lines of tokens plus standalone comments."""
    logical: list[list[_PyTok]] = []
    comments: dict[int, tuple[int, str]] = {}  # line -> (col, text) for comment-only lines
    current: list[_PyTok] = []
    code_lines: set[int] = set()
    i, n = 0, len(text)
    line, line_start = 1, 0
    depth = 0
    while i < n:
        c = text[i]
        if c == "\n":
            if depth == 0 and current:
                logical.append(current)
                current = []
            line += 1
            line_start = i + 1
            i += 1
            continue
        if c == "\\" and text.startswith("\n", i + 1):
            i += 2
            line += 1
            line_start = i
            continue
        if c in " \t\f\r":
            i += 1
            continue
        col = i - line_start
        if c == "#":
            j = text.find("\n", i)
            j = n if j < 0 else j
            comments[line] = (col, text[i:j])
            i = j
            continue
        m = _STRING_START.match(text, i)
        if m:
            quote = m.group(1)
            j = m.end()
            start_line = line
            if len(quote) == 3:
                while True:
                    if j >= n:
                        raise ExtractionError("unterminated triple-quoted string", file_path, line=start_line)
                    if text[j] == "\\":
                        j += 2
                        continue
                    if text.startswith(quote, j):
                        j += 3
                        break
                    if text[j] == "\n":
                        line += 1
                        line_start = j + 1
                    j += 1
            else:
                while j < n and text[j] != quote and text[j] != "\n":
                    j += 2 if text[j] == "\\" else 1
                j = min(j + 1, n) if j < n and text[j] == quote else j
            current.append(_PyTok("STRING", text[i:j], start_line, col))
            code_lines.add(start_line)
            i = j
            continue
        if c.isidentifier():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_" or (text[j].isidentifier())):
                j += 1
            current.append(_PyTok("NAME", text[i:j], line, col))
        elif c.isdigit():
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "._"):
                j += 1
            current.append(_PyTok("NUM", text[i:j], line, col))
        else:
            j = i + 1
            if c in "([{":
                depth += 1
            elif c in ")]}":
                depth = max(depth - 1, 0)
            current.append(_PyTok("OP", c, line, col))
        code_lines.add(line)
        i = j
    if current:
        logical.append(current)
    standalone = {ln: v for ln, v in comments.items() if ln not in code_lines}
    return logical, standalone


def _docstring_body(token: str) -> str:
    m = _STRING_START.match(token)
    quote = m.group(1)
    body = token[m.end():]
    if body.endswith(quote):
        body = body[: -len(quote)]
    return _trim_lines(inspect.cleandoc(body).split("\n"))


def _python_declarations(text: str, file_path: str = "", include_nested: bool = False) -> list[_Decl]:
    logical, comments = _py_lex(text, file_path)
    decls = []
    for k, toks in enumerate(logical):
        first = toks[0]
        if first.kind != "NAME" or first.value != "class" or len(toks) < 2 or toks[1].kind != "NAME":
            continue
        if first.col != 0 and not include_nested:
            continue
        # header colon at bracket depth 0
        depth, colon = 0, None
        for idx, t in enumerate(toks):
            if t.kind == "OP":
                if t.value in "([{":
                    depth += 1
                elif t.value in ")]}":
                    depth -= 1
                elif t.value == ":" and depth == 0:
                    colon = idx
                    break
        doc = None
        if colon is not None:
            rest = toks[colon + 1:]
            if rest:
                if rest[0].kind == "STRING":
                    doc = rest[0].value
            elif k + 1 < len(logical):
                body = logical[k + 1]
                if body[0].line > first.line and all(t.kind == "STRING" for t in body):
                    doc = body[0].value
        # decorators directly above push the head line up
        head = first.line
        b = k - 1
        while b >= 0 and logical[b][0].kind == "OP" and logical[b][0].value == "@" and logical[b][-1].line == head - 1:
            head = logical[b][0].line
            b -= 1
        block = []
        ln = head - 1
        while ln in comments:
            raw = comments[ln][1]
            if ln <= 2 and (raw.startswith("#!") or _CODING.match(raw)):
                break
            block.append(raw)
            ln -= 1
        block.reverse()
        carriers = []
        if block:
            carriers.append(("hash_block", _trim_lines(line.lstrip("#").strip() for line in block)))
        if doc is not None:
            carriers.append(("docstring", _docstring_body(doc)))
        decls.append(_Decl(toks[1].value, len(decls), carriers))
    return decls


def extract_python(file_text: str, file_path: str = "", project: str = "",
                   include_nested: bool = False) -> list[ClassComment]:
    """Class comments of ``class`` statements: the ``#`` block right above
    the statement (decorators allowed in between) followed by the docstring."""
    out = []
    for decl in _python_declarations(file_text, file_path, include_nested):
        comment = _make_comment(decl, Language.PYTHON, file_path, project)
        if comment is not None:
            out.append(comment)
    return out


# ---------------------------------------------------------------- Smalltalk

_TONEL_KIND = re.compile(r"(Class|Trait|Extension|Package)\s*\{")
_TONEL_NAME = re.compile(r"#name\s*:\s*(?:#'?([^\s,'}]+)'?|'([^']+)')")


def _smalltalk_declarations(text: str, file_path: str = "", include_nested: bool = False) -> list[_Decl]:
    i, n = 0, len(text)
    if text.startswith("\ufeff"):
        i = 1
    while i < n and text[i].isspace():
        i += 1
    comment = None
    if i < n and text[i] == '"':
        j = i + 1
        parts = []
        while True:
            k = text.find('"', j)
            if k < 0:
                raise ExtractionError("unterminated class comment", file_path, offset=len(text[:i].encode("utf-8")))
            parts.append(text[j:k])
            if text.startswith('""', k):
                parts.append('"')
                j = k + 2
                continue
            j = k + 1
            break
        comment = "".join(parts)
        i = j
        while i < n and text[i].isspace():
            i += 1
    m = _TONEL_KIND.match(text, i)
    if m is None:
        if comment is None and not text[i:].strip():
            return []
        raise ExtractionError("malformed Tonel header", file_path, offset=len(text[:i].encode("utf-8")))
    if m.group(1) in ("Extension", "Package"):
        return []
    end = text.find("}", m.end())
    record = text[m.end(): end if end >= 0 else n]
    nm = _TONEL_NAME.search(record)
    if end < 0 or nm is None:
        raise ExtractionError("malformed Tonel header: missing #name", file_path, offset=len(text[: m.start()].encode("utf-8")))
    name = nm.group(1) or nm.group(2)
    carriers = []
    if comment is not None:
        carriers.append(("tonel_header", _trim_lines(comment.replace("\r\n", "\n").split("\n"))))
    return [_Decl(name, 0, carriers)]


def extract_smalltalk(file_text: str, file_path: str = "", project: str = "",
                      include_nested: bool = False) -> list[ClassComment]:
    """The leading double-quoted block of a Tonel class file."""
    out = []
    for decl in _smalltalk_declarations(file_text, file_path):
        comment = _make_comment(decl, Language.SMALLTALK, file_path, project)
        if comment is not None:
            out.append(comment)
    return out


_DECLARATIONS = {
    Language.JAVA: _java_declarations,
    Language.PYTHON: _python_declarations,
    Language.SMALLTALK: _smalltalk_declarations,
}

EXTRACTORS = {
    Language.JAVA: extract_java,
    Language.PYTHON: extract_python,
    Language.SMALLTALK: extract_smalltalk,
}


# ------------------------------------------------------------------ corpus

def decode_source(data: bytes, file_path: str = "") -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        logger.warning("%s: invalid UTF-8, undecodable bytes replaced", file_path)
        return data.decode("utf-8", errors="replace")


def _scan_file(args) -> tuple[list[ClassComment], int, str | None]:
    path, rel, language, project, include_nested = args
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        return [], 0, f"{rel}: unreadable ({exc})"
    text = decode_source(data, rel)
    try:
        decls = _DECLARATIONS[language](text, rel, include_nested)
    except ExtractionError as exc:
        return [], 0, str(exc)
    comments = [c for d in decls if (c := _make_comment(d, language, rel, project)) is not None]
    return comments, len(decls), None


def scan_corpus(root_dir, language, project: str, include_nested: bool = False,
                jobs: int = 1) -> tuple[list[ClassComment], CorpusStats]:
    """Walk ``root_dir`` for files of ``language`` and extract every class comment.

    Per-file problems are logged and skipped; output order is the
    lexicographic relative path, then declaration order, for any ``jobs``.
    """
    language = Language.parse(language)
    root = Path(root_dir)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise DataError(f"cannot read corpus root {root}")
    ext = EXTENSIONS[language]
    files = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if name.endswith(ext):
                full = Path(dirpath, name)
                files.append((full.relative_to(root).as_posix(), full))
    files.sort()
    tasks = [(str(full), rel, language, project, include_nested) for rel, full in files]
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_scan_file, tasks, chunksize=16))
    else:
        results = [_scan_file(t) for t in tasks]
    stats = CorpusStats(project, language)
    comments: list[ClassComment] = []
    for found, n_classes, warning in results:
        if warning:
            logger.warning(warning)
        comments.extend(found)
        stats.n_classes += n_classes
    stats.n_commented = len(comments)
    return comments, stats


def write_jsonl(comments: Iterable[ClassComment], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in comments:
            fh.write(json.dumps(c.to_dict(), ensure_ascii=False, sort_keys=False) + "\n")


def read_jsonl(path) -> list[ClassComment]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            try:
                out.append(ClassComment.from_dict(record))
            except DataError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return out
