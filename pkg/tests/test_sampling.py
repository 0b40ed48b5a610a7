from collections import Counter

import pytest
from hypothesis import given, strategies as st

from tesseract.extraction import ClassComment
from tesseract.sampling import (
    SamplingPlan,
    allocate_proportional,
    build_plan,
    quintile_bounds,
    quintile_strata,
    required_sample_size,
    split_quota,
    stratified_sample,
)
from tesseract._util import Language

from .conftest import FIXTURES

JAVA_COUNTS = {"Eclipse": 6253, "Spark": 740, "Guava": 2858, "Guice": 466, "Hadoop": 8846, "Vaadin": 2335}
PYTHON_COUNTS = {"Requests": 43, "Pandas": 377, "Mailpile": 283, "IPython": 240,
                 "Django": 1164, "Pipenv": 1163, "Pytorch": 520}
SMALLTALK_COUNTS = {"GToolkit": 1315, "Seaside": 411, "Roassal": 493, "Moose": 316,
                    "PolyMath": 155, "PetitParser": 99, "Pillar": 237}


def _eclipse_lengths():
    return [int(v) for v in (FIXTURES / "eclipse_lengths.txt").read_text().split()]


def _comments(lengths, project="p"):
    return [ClassComment(f"c{i}", project, Language.JAVA, f"C{i}", f"C{i}.java",
                         "\n".join(["x"] * n), n, ["javadoc"]) for i, n in enumerate(lengths)]


class TestSampleSize:
    @pytest.mark.parametrize("population,expected", [(3790, 349), (3026, 341), (1, 1)])
    def test_known_sizes(self, population, expected):
        assert required_sample_size(population, 0.95, 0.05) == expected

    def test_java_total_within_two_of_reported(self):
        assert sum(JAVA_COUNTS.values()) == 21498
        assert abs(required_sample_size(21498, 0.95, 0.05) - 376) <= 2

    def test_unsupported_confidence_lists_supported(self):
        with pytest.raises(ValueError, match="0.90, 0.95, 0.99"):
            required_sample_size(100, 0.97, 0.05)

    def test_bad_population(self):
        with pytest.raises(ValueError):
            required_sample_size(0)

    def test_limit(self):
        assert required_sample_size(10**9, 0.95, 0.05) in (384, 385)

    @given(st.integers(1, 200_000), st.integers(0, 5000), st.sampled_from([0.90, 0.95, 0.99]))
    def test_monotone_and_bounded(self, n, extra, conf):
        a = required_sample_size(n, conf, 0.05)
        b = required_sample_size(n + extra, conf, 0.05)
        assert 1 <= a <= n and a <= b


class TestAllocation:
    def test_eclipse_share(self):
        quotas = allocate_proportional(JAVA_COUNTS, 376)
        assert abs(quotas["Eclipse"] - 110) <= 1
        assert sum(quotas.values()) == 376

    def test_python_and_smalltalk_columns(self):
        assert allocate_proportional(PYTHON_COUNTS, 349) == {
            "Requests": 4, "Pandas": 35, "Mailpile": 26, "IPython": 22,
            "Django": 107, "Pipenv": 107, "Pytorch": 48}
        assert allocate_proportional(SMALLTALK_COUNTS, 341) == {
            "GToolkit": 148, "Seaside": 46, "Roassal": 56, "Moose": 36,
            "PolyMath": 17, "PetitParser": 11, "Pillar": 27}

    def test_single_project(self):
        assert allocate_proportional({"only": 50}, 17) == {"only": 17}

    def test_ties_break_by_name(self):
        assert allocate_proportional({"c": 1, "b": 1, "a": 1}, 2) == {"a": 1, "b": 1, "c": 0}

    def test_half_share_project_is_served(self):
        quotas = allocate_proportional({"a": 50, "b": 50, "c": 50, "tiny": 25}, 7)
        assert quotas["tiny"] >= 1

    def test_all_zero(self):
        with pytest.raises(ValueError):
            allocate_proportional({"a": 0, "b": 0}, 0)

    @given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3), st.integers(0, 500), min_size=1, max_size=8),
           st.data())
    def test_sums_exactly(self, counts, data):
        total = sum(counts.values())
        if total == 0:
            return
        n = data.draw(st.integers(0, total))
        quotas = allocate_proportional(counts, n)
        assert sum(quotas.values()) == n
        for p, q in quotas.items():
            assert abs(q - n * counts[p] / total) < 1 + 1e-9
            if counts[p] > 0 and n * counts[p] / total >= 0.5:
                assert q >= 1


def _nearest_rank_oracle(values, pct):
    ordered = sorted(values)
    for v in ordered:
        if sum(1 for x in ordered if x <= v) * 100 >= pct * len(ordered):
            return v
    return ordered[-1]


class TestQuintiles:
    def test_eclipse(self):
        lengths = _eclipse_lengths()
        assert len(lengths) == 6253
        assert quintile_bounds(lengths) == [1, 3, 4, 5, 7, 1473]
        assert quintile_strata(lengths) == [(1, 3), (4, 4), (5, 5), (6, 7), (8, 1473)]

    def test_equal_lengths(self):
        assert quintile_strata([4] * 30) == [(4, 4)]

    def test_one_to_ten(self):
        values = list(range(1, 11))
        oracle = [1] + [_nearest_rank_oracle(values, p) for p in (20, 40, 60, 80)] + [10]
        assert quintile_bounds(values) == oracle == [1, 2, 4, 6, 8, 10]
        assert quintile_strata(values) == [(1, 2), (3, 4), (5, 6), (7, 8), (9, 10)]

    @given(st.lists(st.integers(1, 60), min_size=1, max_size=200))
    def test_strata_cover_and_are_disjoint(self, lengths):
        strata = quintile_strata(lengths)
        assert strata[0][0] == min(lengths) and strata[-1][1] == max(lengths)
        assert len(strata) <= 5
        for (lo, hi), (lo2, _) in zip(strata, strata[1:]):
            assert lo <= hi and lo2 == hi + 1
        bounds = quintile_bounds(lengths)
        assert bounds[1:5] == [_nearest_rank_oracle(lengths, p) for p in (20, 40, 60, 80)]


class TestStratifiedSample:
    def test_eclipse_quota_splits_evenly(self):
        lengths = _eclipse_lengths()
        strata = quintile_strata(lengths)
        sample = stratified_sample(_comments(lengths), 110, strata, seed=1)
        per = Counter(next(k for k, (lo, hi) in enumerate(strata) if lo <= c.line_count <= hi) for c in sample)
        assert sorted(per.values()) == [22] * 5

    def test_identity_when_quota_is_population(self):
        comments = _comments([1, 2, 3, 5, 8, 13])
        sample = stratified_sample(comments, 6, quintile_strata([1, 2, 3, 5, 8, 13]), seed=3)
        assert [c.id for c in sample] == [c.id for c in comments]

    def test_same_seed_same_sample(self):
        lengths = list(range(1, 40)) * 3
        strata = quintile_strata(lengths)
        a = stratified_sample(_comments(lengths), 20, strata, seed=9)
        b = stratified_sample(_comments(lengths), 20, strata, seed=9)
        assert [c.id for c in a] == [c.id for c in b]

    def test_quota_too_large(self):
        with pytest.raises(ValueError):
            stratified_sample(_comments([1, 2]), 3, [(1, 2)], seed=0)

    def test_deficit_spills_over(self):
        assert split_quota(10, [1, 10, 10]) == [1, 6, 3]
        assert sum(split_quota(12, [0, 2, 30, 1, 5])) == 12

    @given(st.lists(st.integers(0, 30), min_size=1, max_size=5), st.data())
    def test_split_quota_is_feasible(self, sizes, data):
        quota = data.draw(st.integers(0, sum(sizes)))
        plan = split_quota(quota, sizes)
        assert sum(plan) == quota
        assert all(0 <= p <= s for p, s in zip(plan, sizes))

    @given(st.lists(st.integers(1, 12), min_size=1, max_size=60), st.integers(0, 2**16), st.data())
    def test_sample_is_subset_without_duplicates(self, lengths, seed, data):
        quota = data.draw(st.integers(0, len(lengths)))
        comments = _comments(lengths)
        sample = stratified_sample(comments, quota, quintile_strata(lengths), seed)
        ids = [c.id for c in sample]
        assert len(ids) == len(set(ids)) == quota
        assert set(ids) <= {c.id for c in comments}


def test_build_plan():
    comments = _comments([1, 2, 3, 4, 5] * 40, "alpha") + _comments([2, 9] * 30, "beta")
    plan, sample = build_plan(comments, seed=4)
    assert isinstance(plan, SamplingPlan)
    assert plan.population == 260
    assert sum(plan.per_project_quota.values()) == plan.sample_size == len(sample)
    assert set(plan.strata) == {"alpha", "beta"}
    again, sample2 = build_plan(comments, seed=4)
    assert again.to_json() == plan.to_json()
    assert [c.id for c in sample] == [c.id for c in sample2]
