"""Sample-size computation and length-stratified sampling of class comments."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .extraction import ClassComment

Z_SCORES = {0.90: 1.645, 0.95: 1.960, 0.99: 2.576}


@dataclass
class SamplingPlan:
    confidence: float
    margin: float
    population: int
    sample_size: int
    per_project_quota: dict[str, int] = field(default_factory=dict)
    strata: dict[str, list[tuple[int, int]]] = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> str:
        data = asdict(self)
        data["strata"] = {p: [list(s) for s in v] for p, v in self.strata.items()}
        return json.dumps(data, indent=2, sort_keys=True)


def _z_score(confidence: float) -> float:
    for level, z in Z_SCORES.items():
        if math.isclose(confidence, level):
            return z
    supported = ", ".join(f"{c:.2f}" for c in Z_SCORES)
    raise ValueError(f"unsupported confidence {confidence}; supported: {supported}")


def required_sample_size(population: int, confidence: float = 0.95, margin: float = 0.05) -> int:
    """Cochran's sample size for a proportion (p = 0.5) with finite-population correction.

    >>> required_sample_size(3790, 0.95, 0.05)
    349
    """
    if population < 1:
        raise ValueError("population must be >= 1")
    if not 0 < margin < 1:
        raise ValueError("margin must be in (0, 1)")
    z = _z_score(confidence)
    n0 = z * z * 0.25 / (margin * margin)
    n = n0 / (1 + (n0 - 1) / population)
    # round half up; float noise must not flip an exact .5
    return min(int(math.floor(n + 0.5 + 1e-9)), population)


def allocate_proportional(counts: Mapping[str, int], n: int) -> dict[str, int]:
    """Split ``n`` across projects in proportion to ``counts`` (largest remainder).

    Projects whose exact share is at least one half but rounds down to zero
    are served first, then remaining seats go by remainder size, ties by name.
    """
    if any(c < 0 for c in counts.values()):
        raise ValueError("counts must be non-negative")
    total = sum(counts.values())
    if total == 0:
        raise ValueError("all counts are zero")
    if n > total:
        raise ValueError(f"cannot allocate {n} from a population of {total}")
    names = sorted(counts)
    shares = {p: n * counts[p] / total for p in names}
    quotas = {p: int(math.floor(shares[p])) for p in names}
    left = n - sum(quotas.values())

    def priority(p):
        starved = counts[p] > 0 and quotas[p] == 0 and shares[p] >= 0.5
        return (not starved, -(shares[p] - quotas[p]), p)

    for p in sorted(names, key=priority)[:left]:
        quotas[p] += 1
    return quotas


def _nearest_rank(sorted_values: Sequence[int], pct: float) -> int:
    n = len(sorted_values)
    rank = max(1, math.ceil(pct / 100.0 * n - 1e-12))
    return sorted_values[rank - 1]


def quintile_bounds(lengths: Sequence[int]) -> list[int]:
    values = sorted(int(v) for v in lengths)
    if not values:
        raise ValueError("lengths must be non-empty")
    return [values[0]] + [_nearest_rank(values, p) for p in (20, 40, 60, 80)] + [values[-1]]


def quintile_strata(lengths: Sequence[int]) -> list[tuple[int, int]]:
    """Length strata bounded by nearest-rank quintiles.

    Bounds ``b0..b5`` give strata ``[b0, b1], [b1+1, b2], ..., [b4+1, b5]``;
    empty strata (repeated bounds) disappear.
    """
    bounds = quintile_bounds(lengths)
    strata = [(bounds[0], bounds[1])]
    for lo, hi in zip(bounds[1:-1], bounds[2:]):
        if hi > lo:
            strata.append((lo + 1, hi))
    return strata


def _stratum_of(length: int, strata: Sequence[tuple[int, int]]) -> int:
    for k, (lo, hi) in enumerate(strata):
        if lo <= length <= hi:
            return k
    return 0 if length < strata[0][0] else len(strata) - 1


def split_quota(quota: int, sizes: Sequence[int]) -> list[int]:
    """Equal split of ``quota`` over strata of the given sizes.

    The remainder goes to the most populated strata first; a stratum that
    cannot fill its share passes the deficit to the next stratum up (wrapping
    to the lower ones at the top).
    """
    k = len(sizes)
    if quota > sum(sizes):
        raise ValueError(f"quota {quota} exceeds population {sum(sizes)}")
    plan = [quota // k] * k
    for idx in sorted(range(k), key=lambda s: (-sizes[s], s))[: quota % k]:
        plan[idx] += 1
    for _ in range(k):
        moved = False
        for s in range(k):
            extra = plan[s] - sizes[s]
            if extra > 0:
                plan[s] = sizes[s]
                for step in range(1, k):
                    t = (s + step) % k
                    room = sizes[t] - plan[t]
                    if room > 0:
                        take = min(room, extra)
                        plan[t] += take
                        extra -= take
                    if extra == 0:
                        break
                moved = True
        if not moved:
            break
    return plan


def stratified_sample(comments: Sequence[ClassComment], quota: int,
                      strata: Sequence[tuple[int, int]], seed: int) -> list[ClassComment]:
    """Draw ``quota`` comments without replacement, equally across length strata."""
    if quota > len(comments):
        raise ValueError(f"quota {quota} exceeds population {len(comments)}")
    if quota == 0:
        return []
    members: list[list[int]] = [[] for _ in strata]
    for i, c in enumerate(comments):
        members[_stratum_of(c.line_count, strata)].append(i)
    plan = split_quota(quota, [len(m) for m in members])
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for idx, take in zip(members, plan):
        if take:
            chosen.extend(int(i) for i in rng.choice(idx, size=take, replace=False))
    return [comments[i] for i in sorted(chosen)]


def build_plan(comments: Sequence[ClassComment], confidence: float = 0.95,
               margin: float = 0.05, seed: int = 0) -> tuple[SamplingPlan, list[ClassComment]]:
    """Full sampling design over a multi-project comment list."""
    from ._util import derive_seed

    by_project: dict[str, list[ClassComment]] = {}
    for c in comments:
        by_project.setdefault(c.project, []).append(c)
    population = len(comments)
    n = required_sample_size(population, confidence, margin)
    quotas = allocate_proportional({p: len(v) for p, v in by_project.items()}, n)
    plan = SamplingPlan(confidence, margin, population, n, quotas, {}, seed)
    sample: list[ClassComment] = []
    for project in sorted(by_project):
        group = by_project[project]
        strata = quintile_strata([c.line_count for c in group])
        plan.strata[project] = strata
        sample.extend(stratified_sample(group, quotas[project], strata, derive_seed(seed, "sample", project)))
    return plan, sample
