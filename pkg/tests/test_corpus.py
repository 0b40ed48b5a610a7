import re

import pytest
from hypothesis import given, strategies as st

from tesseract import DataError
from tesseract._util import Language
from tesseract.corpus import (
    LabeledSentence,
    category_tasks,
    load_ground_truth,
    load_taxonomy,
    normalize,
    read_sentences,
    save_ground_truth,
    sentences_from_comments,
    split_sentences,
    write_sentences,
)
from tesseract.extraction import extract_java

from .conftest import FIXTURES

HEADER = "comment_id,project,language,sentence,categories\n"


def _write(tmp_path, body, name="truth.csv"):
    path = tmp_path / name
    path.write_text(HEADER + body, encoding="utf-8")
    return path


class TestSplit:
    def test_two_sentences(self):
        assert split_sentences("Represents a widget. See Foo.") == ["Represents a widget.", "See Foo."]

    def test_colon_line(self):
        assert split_sentences("Note:\nposition may change even if an element has no parent") == [
            "Note:", "position may change even if an element has no parent"]

    def test_abbreviation(self):
        assert split_sentences("e.g. a widget") == ["e.g. a widget"]
        assert split_sentences("Use a map, i.e. A dictionary.") == ["Use a map, i.e. A dictionary."]

    def test_blank_line(self):
        assert split_sentences("first part\n\nsecond part") == ["first part", "second part"]

    def test_lowercase_continuation(self):
        assert split_sentences("Version 1.2 is old. it works") == ["Version 1.2 is old. it works"]

    def test_terminator_before_newline(self):
        assert split_sentences("Ends here.\nnext line") == ["Ends here.", "next line"]

    @given(st.text(alphabet="abcXYZ019 .!?:\n", max_size=80))
    def test_alphanumerics_preserved(self, text):
        parts = split_sentences(text)
        assert all(p.strip() for p in parts)
        keep = lambda s: re.sub(r"[^A-Za-z0-9]", "", s)
        assert keep("".join(parts)) == keep(text)


class TestNormalize:
    @pytest.mark.parametrize("raw,expected", [
        ("@author Vaadin Ltd.", "author vaadin ltd"),
        ("", ""),
        ("A {@link RecordReader} for {@link SequenceFile}s.", "a link recordreader for link sequencefile s"),
    ])
    def test_examples(self, raw, expected):
        assert normalize(raw) == expected

    @given(st.text(max_size=60))
    def test_idempotent_and_clean(self, text):
        once = normalize(text)
        assert normalize(once) == once
        assert re.fullmatch(r"([a-z0-9]+( [a-z0-9]+)*)?", once)


class TestTaxonomy:
    def test_bundled_languages(self):
        tax = load_taxonomy()
        java = tax.category_ids("java")
        assert java[:7] == ["Summary", "Expand", "Ownership", "Pointer", "Usage", "Deprecation", "Rationale"]
        assert "Intent" in tax.category_ids("smalltalk")
        assert "Parameters" in tax.category_ids("python")

    def test_resolve_is_case_insensitive(self):
        assert load_taxonomy().resolve("java", "summary") == "Summary"

    def test_bad_mapping_endpoint(self, tmp_path):
        path = tmp_path / "tax.toml"
        path.write_text('[[category]]\nlanguage = "java"\nid = "A"\n\n'
                        '[[mapping]]\nfrom = "java:A"\nto = "python:B"\nkind = "exact"\n')
        with pytest.raises(DataError, match="python:B"):
            load_taxonomy(path)

    def test_mappings_reference_known_categories(self):
        tax = load_taxonomy()
        for m in tax.mappings:
            assert m.source[1] in tax.category_ids(m.source[0])
            assert m.target[1] in tax.category_ids(m.target[0])


class TestGroundTruth:
    def test_multi_label(self, tmp_path):
        path = _write(tmp_path, 'c1,p,java,"Represents a widget, see Foo.",Summary;Usage\n')
        (s,) = load_ground_truth(path)
        assert s.labels == {"Summary", "Usage"}
        assert s.normalized == "represents a widget see foo"
        assert s.sentence_id == "c1#0"

    def test_unknown_category_names_line(self, tmp_path):
        path = _write(tmp_path, "c1,p,java,One.,Summary\nc1,p,java,Two.,Sumary\n")
        with pytest.raises(DataError, match=r"truth\.csv:3.*Sumary"):
            load_ground_truth(path)

    def test_duplicate(self, tmp_path):
        path = _write(tmp_path, "c1,p,java,Same.,Summary\nc1,p,java,Same.,Usage\n")
        with pytest.raises(DataError, match="duplicate"):
            load_ground_truth(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("id,text\n1,x\n")
        with pytest.raises(DataError, match="header"):
            load_ground_truth(path)

    def test_save_round_trip(self, tmp_path):
        original = load_ground_truth(FIXTURES / "java7.csv")
        out = tmp_path / "copy.csv"
        save_ground_truth(original, out)
        assert load_ground_truth(out) == original

    def test_sentences_jsonl_round_trip(self, tmp_path):
        original = load_ground_truth(FIXTURES / "separable.csv")
        path = tmp_path / "s.jsonl"
        write_sentences(original, path)
        assert read_sentences(path) == original


class TestCategoryTasks:
    def _sentences(self, n_a, n_b):
        out = []
        for i in range(n_a):
            out.append(LabeledSentence(f"a{i}", f"a{i}", 0, "x", "x", frozenset({"Summary"})))
        for i in range(n_b):
            out.append(LabeledSentence(f"b{i}", f"b{i}", 0, "y", "y", frozenset({"Usage"})))
        return out

    def test_threshold_boundary(self):
        tasks = category_tasks(self._sentences(40, 39))
        assert [(t.category, t.positive_count) for t in tasks] == [("Summary", 40)]
        assert tasks[0].trainable and tasks[0].name == "java:Summary"

    def test_min_count_zero(self):
        assert {t.category for t in category_tasks(self._sentences(2, 1), min_count=0)} == {"Summary", "Usage"}

    def test_java7_fixture(self):
        tasks = category_tasks(load_ground_truth(FIXTURES / "java7.csv"))
        assert len(tasks) == 7 and all(t.positive_count == 45 for t in tasks)

    def test_empty(self):
        with pytest.raises(ValueError):
            category_tasks([])


def test_sentences_from_comments():
    comments = extract_java("/** Represents a thing. See Other. */\nclass T {}", "T.java", "demo")
    sents = sentences_from_comments(comments)
    assert [s.raw for s in sents] == ["Represents a thing.", "See Other."]
    assert all(s.language is Language.JAVA and s.project == "demo" and not s.labels for s in sents)
