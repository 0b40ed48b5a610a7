"""Regenerate the committed synthetic ground-truth CSVs.

    python3 tests/fixtures/generate_synthetic.py

separable.csv  200 Java sentences: 60 Summary, 140 Deprecation, disjoint
               vocabulary and distinct sentence openings.
java7.csv      Java sentences for seven categories, 45 positives each plus
               unlabeled filler; each category has its own openings and phrasing.
eclipse_lengths.txt  6253 comment line counts with quintile bounds 1,3,4,5,7,1473.
"""
from __future__ import annotations

import csv
import itertools
import random
from pathlib import Path

HERE = Path(__file__).parent
HEADER = ["comment_id", "project", "language", "sentence", "categories"]


def separable(rng: random.Random) -> list[list[str]]:
    adjs = ["mutable", "immutable", "sorted", "cached", "lazy", "bounded"]
    nouns = ["widget", "buffer", "registry", "matrix", "vector", "graph", "queue", "table"]
    parts = ["element", "node", "entry", "cell", "pixel", "token"]
    summary = [f"Represents a {a} {n} of {p}s." for a, n, p in itertools.product(adjs, nouns, parts)]
    rng.shuffle(summary)
    verbs = ["superseded", "replaced", "retired", "obsoleted", "withdrawn"]
    targets = ["legacy bridge", "old scheduler", "classic parser", "prior codec", "v1 protocol",
               "xml loader", "sync client"]
    deprecation = [f"Deprecated: {v} in release {r}, migrate off the {t}."
                   for v, t, r in itertools.product(verbs, targets, range(2, 6))]
    rng.shuffle(deprecation)
    rows = [(s, "Summary") for s in summary[:60]] + [(s, "Deprecation") for s in deprecation[:140]]
    rng.shuffle(rows)
    return [[f"sep{i // 2:03d}", "synthetic", "java", s, c] for i, (s, c) in enumerate(rows)]


JAVA7 = {
    "Summary": (["Represents", "Models", "Provides", "Implements"],
                ["a thread safe {n}", "the {n} abstraction", "an immutable {n} view", "a lightweight {n}"]),
    "Expand": (["Internally", "The implementation", "Under the hood this", "Each call"],
               ["keeps the {n} in a ring buffer", "walks the {n} lazily", "caches every {n} lookup",
                "rebuilds the {n} index on resize"]),
    "Ownership": (["author", "Author", "Maintained by", "Written by"],
                  ["jane doe", "the {n} team", "john smith", "core developers"]),
    "Pointer": (["See", "see also", "Refer to", "Compare with"],
                ["the {n} helper", "the {n} documentation", "the {n} factory", "related {n} classes"]),
    "Usage": (["Example", "To use", "Typical usage", "Call"],
              ["new {n} builder then build it", "create the {n} and register a listener",
               "start the {n} before submitting work", "the {n} constructor with a config"]),
    "Deprecation": (["Deprecated", "deprecated", "This is deprecated", "Obsolete"],
                    ["since release four, migrate off the {n}", "in favour of the new {n}",
                     "and will be removed with the {n}", "replaced by the {n} module"]),
    "Rationale": (["We chose", "The reason", "This design", "Because"],
                  ["a {n} to avoid locking overhead", "matters since the {n} must stay fast",
                   "favours a simple {n} over speed", "keeps the {n} predictable under load"]),
}
FILLER = ["Copyright holders retain notice {k}.", "Generated file number {k}.", "Formatting marker {k}."]
NOUNS = ["cache", "queue", "scheduler", "parser", "socket", "registry", "session", "buffer", "codec"]


def java7(rng: random.Random, per_category: int = 45, n_filler: int = 30) -> list[list[str]]:
    rows = []
    for cat, (leads, tails) in JAVA7.items():
        seen = set()
        while len(seen) < per_category:
            s = f"{rng.choice(leads)} {rng.choice(tails).format(n=rng.choice(NOUNS))}."
            if s not in seen:
                seen.add(s)
                rows.append((s, cat))
    for k in range(n_filler):
        rows.append((rng.choice(FILLER).format(k=k), ""))
    rng.shuffle(rows)
    return [[f"j{i // 3:03d}", rng.choice(["eclipse", "guava", "hadoop"]), "java", s, c]
            for i, (s, c) in enumerate(rows)]


def eclipse_lengths(rng: random.Random) -> list[int]:
    counts = {1: 600, 2: 400, 3: 500, 4: 1200, 5: 1100, 6: 600, 7: 700}
    values = [v for v, c in counts.items() for _ in range(c)]
    tail = 6253 - len(values)
    values += [1473] + [rng.randint(8, 200) for _ in range(tail - 1)]
    rng.shuffle(values)
    return values


def write_csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)


def main():
    write_csv(HERE / "separable.csv", separable(random.Random(7)))
    write_csv(HERE / "java7.csv", java7(random.Random(11)))
    (HERE / "eclipse_lengths.txt").write_text("\n".join(map(str, eclipse_lengths(random.Random(5)))) + "\n")


if __name__ == "__main__":
    main()
