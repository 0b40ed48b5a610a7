from __future__ import annotations

import hashlib
import sys
from enum import Enum
from importlib import resources

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class Language(str, Enum):
    JAVA = "java"
    PYTHON = "python"
    SMALLTALK = "smalltalk"

    @classmethod
    def parse(cls, value: "str | Language") -> "Language":
        if isinstance(value, Language):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown language {value!r} (expected one of: {names})") from None


class DataError(ValueError):
    """Malformed user-supplied data (CSV, JSONL, catalog, taxonomy)."""


def derive_seed(seed: int, *keys: object) -> int:
    """Stable 32-bit seed derived from ``seed`` and a purpose/index path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for key in keys:
        h.update(b"\x1f")
        h.update(str(key).encode())
    return int.from_bytes(h.digest(), "little") & 0xFFFFFFFF


def data_path(name: str):
    return resources.files("tesseract").joinpath("data").joinpath(name)


def read_toml(path) -> dict:
    if hasattr(path, "read_bytes"):
        raw = path.read_bytes()
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"{path}: {exc}") from exc
