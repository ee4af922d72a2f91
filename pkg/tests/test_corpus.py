import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdpraudit import synthetic
from gdpraudit.classifier import AnnotatedSentence
from gdpraudit.corpus import (
    ENGLISH_STOPWORDS,
    CorpusManifest,
    FilterStatus,
    ManifestEntry,
    PolicyDocument,
    apply_filters,
    clean_html,
    corpus_statistics,
    dedup_key,
    english_ratio,
    ingest,
    load_manifest,
    read_corpus,
    status_counts,
    write_corpus,
)
from gdpraudit.errors import DataError
from gdpraudit.labels import ALL_LABELS, GdprLabel
from gdpraudit.textstats import Sentence

ENGLISH = "We collect your data and we share it with our partners when you use the service. "


def english_html(n_bytes):
    body = (ENGLISH * (n_bytes // len(ENGLISH) + 1))
    html = f"<html><body><p>{body}</p></body></html>"
    return html[: n_bytes - len("</p></body></html>")] + "</p></body></html>"


def write_manifest(root, files):
    """files: list of (id, filename, content bytes or None for missing)."""
    lines = ["id,company,source_uri,local_path"]
    for pid, name, content in files:
        if content is not None:
            (root / name).write_bytes(content)
        lines.append(f"{pid},Co {pid},https://example.org/{pid},{name}")
    (root / "manifest.csv").write_text("\n".join(lines) + "\n")
    return load_manifest(root / "manifest.csv")


class TestCleanHtml:
    @pytest.mark.parametrize(
        "raw,text",
        [(b"<p>We collect data.</p>", "We collect data."), (b"<script>x()</script>Hello", "Hello"), (b"A&amp;B", "A&B")],
    )
    def test_examples(self, raw, text):
        assert clean_html(raw) == text

    def test_strips_scripts_and_tags(self):
        html = "<html><head><title>T</title><style>p{}</style></head><body><script>x=1</script><p>Hello <b>there</b>.</p></body></html>"
        assert clean_html(html) == "Hello there."

    def test_blocks_become_paragraphs(self):
        assert clean_html("<p>One.</p><p>Two.</p>") == "One.\n\nTwo."
        assert clean_html("<ul><li>a</li><li>b</li></ul>") == "a\n\nb"

    def test_br_is_line_break(self):
        assert clean_html("<p>one<br>two<br/>three</p>") == "one\ntwo\nthree"

    def test_entities_and_whitespace(self):
        assert clean_html("<p>A &amp; B &lt;c&gt;   d\t e</p>") == "A & B <c> d e"

    def test_plain_text_passthrough(self):
        assert clean_html("First para.\r\n\r\nSecond  para.") == "First para.\n\nSecond para."

    def test_bytes_with_bom(self):
        assert clean_html("\ufeff<p>x</p>".encode("utf-8")) == "x"

    def test_idempotent_on_synthetic_policy(self):
        html, _ = synthetic.policy_text(np.random.default_rng(0), [GdprLabel.CPI])
        once = clean_html(html)
        assert clean_html(once) == once
        assert "track()" not in once and "Privacy Policy" not in once


class TestFilters:
    def test_too_short(self, tmp_path):
        m = write_manifest(tmp_path, [("s", "s.html", english_html(1024).encode())])
        [doc] = ingest(m)
        assert doc.byte_size == 1024 and doc.filter_status is FilterStatus.REJECTED_TOO_SHORT

    def test_boundary_is_inclusive(self, tmp_path):
        m = write_manifest(tmp_path, [("a", "a.html", english_html(2048).encode()),
                                      ("b", "b.html", english_html(2047).encode())])
        assert [d.filter_status for d in ingest(m)] == [FilterStatus.ACCEPTED, FilterStatus.REJECTED_TOO_SHORT]

    def test_accepted_english(self, tmp_path):
        m = write_manifest(tmp_path, [("e", "e.html", english_html(3000).encode())])
        [doc] = ingest(m)
        assert doc.filter_status is FilterStatus.ACCEPTED and doc.byte_size == 3000
        assert doc.cleaned_text.startswith("We collect your data")

    def test_non_english(self, tmp_path):
        text = ("Wir erheben Ihre Daten und teilen diese mit Partnern im Rahmen der Nutzung. " * 40).encode()
        m = write_manifest(tmp_path, [("de", "de.html", text)])
        assert ingest(m)[0].filter_status is FilterStatus.REJECTED_NON_ENGLISH

    def test_duplicates_first_kept(self, tmp_path):
        page = english_html(3000)
        variant = page.replace("<p>", "<p>  ").upper()  # same text after case/space normalization
        m = write_manifest(tmp_path, [("a", "a.html", page.encode()), ("b", "b.html", variant.encode()),
                                      ("c", "c.html", page.encode())])
        assert [d.filter_status for d in ingest(m)] == [
            FilterStatus.ACCEPTED, FilterStatus.REJECTED_DUPLICATE, FilterStatus.REJECTED_DUPLICATE
        ]

    def test_unreadable(self, tmp_path):
        m = write_manifest(tmp_path, [("gone", "gone.html", None)])
        [doc] = ingest(m)
        assert doc.filter_status is FilterStatus.REJECTED_UNREADABLE and doc.error

    def test_size_on_text(self, tmp_path):
        padded = english_html(1500).replace("<body>", "<body><script>" + "x" * 3000 + "</script>")
        m = write_manifest(tmp_path, [("p", "p.html", padded.encode())])
        assert ingest(m)[0].accepted
        assert ingest(m, size_on="text")[0].filter_status is FilterStatus.REJECTED_TOO_SHORT

    def test_bad_parameters(self):
        with pytest.raises(DataError):
            apply_filters([], min_bytes=0)
        with pytest.raises(DataError):
            apply_filters([], language_threshold=1.5)
        with pytest.raises(DataError):
            apply_filters([], size_on="words")

    def test_workers_do_not_change_result(self, tmp_path):
        rng = np.random.default_rng(1)
        files = []
        for i in range(12):
            html, _ = synthetic.policy_text(rng, [GdprLabel.CPI], other_sentences=40)
            files.append((f"p{i}", f"p{i}.html", html.encode()))
        files.append(("dup", "dup.html", files[0][2]))
        m = write_manifest(tmp_path, files)
        serial = [d.to_dict() for d in ingest(m)]
        assert [d.to_dict() for d in ingest(m, workers=4)] == serial

    def test_filters_idempotent(self, tmp_path):
        m = write_manifest(tmp_path, [("a", "a.html", english_html(3000).encode()),
                                      ("b", "b.html", english_html(3000).encode()),
                                      ("c", "c.html", english_html(100).encode())])
        docs = ingest(m)
        assert apply_filters(docs) == docs

    def test_stopword_list(self):
        assert len(ENGLISH_STOPWORDS) == 100
        assert english_ratio("") == 0.0
        assert english_ratio("the cat and the dog") == pytest.approx(3 / 5)

    @settings(max_examples=50)
    @given(st.lists(st.sampled_from(["We", "collect", "DATA", " ", "\n", "\t", "privacy"]), max_size=30))
    def test_dedup_key_normalization(self, parts):
        text = "".join(parts)
        assert dedup_key(text) == dedup_key("  " + text.upper().replace(" ", "  ") + "\n")


class TestManifest:
    def test_csv_relative_paths(self, tmp_path):
        m = write_manifest(tmp_path, [("a", "a.html", b"x")])
        assert m.entries[0].local_path == str(tmp_path / "a.html")
        assert m.corpus_name == "manifest"

    def test_json(self, tmp_path):
        rows = [{"id": "a", "company": "A", "source_uri": "u", "local_path": "/abs/a.html", "jurisdiction": "UK"}]
        (tmp_path / "m.json").write_text(json.dumps(rows))
        [e] = load_manifest(tmp_path / "m.json").entries
        assert e == ManifestEntry("a", "A", "u", "/abs/a.html", "UK")

    def test_missing_column(self, tmp_path):
        (tmp_path / "m.csv").write_text("id,company,local_path\na,A,a.html\n")
        with pytest.raises(DataError, match="source_uri"):
            load_manifest(tmp_path / "m.csv")

    def test_duplicate_ids(self, tmp_path):
        with pytest.raises(DataError, match="duplicate"):
            write_manifest(tmp_path, [("a", "a.html", b"x"), ("a", "b.html", b"y")])

    def test_empty(self, tmp_path):
        (tmp_path / "m.csv").write_text("")
        assert load_manifest(tmp_path / "m.csv").entries == ()
        assert ingest(CorpusManifest(())) == []


class TestCorpusFile:
    def test_round_trip(self, tmp_path):
        m = write_manifest(tmp_path, [("a", "a.html", english_html(3000).encode()), ("b", "b.html", None)])
        docs = ingest(m)
        write_corpus(tmp_path / "c.jsonl", docs)
        back = read_corpus(tmp_path / "c.jsonl")
        assert [d.to_dict() for d in back] == [d.to_dict() for d in docs]
        assert back[0].raw_bytes is None
        assert status_counts(back)["Accepted"] == 1 and status_counts(back)["RejectedUnreadable"] == 1

    def test_byte_size_checked(self):
        with pytest.raises(DataError):
            PolicyDocument("a", "", "", None, b"abc", "", 2, FilterStatus.ACCEPTED)


def doc(pid, text, status=FilterStatus.ACCEPTED):
    return PolicyDocument(pid, "", "", None, None, text, 5000, status)


def ann(pid, idx, label, text="a b c"):
    return AnnotatedSentence(Sentence(pid, idx, text), label)


class TestStatistics:
    def test_totals_over_accepted_only(self):
        docs = [doc("a", "One two three. Four five."), doc("b", "Six seven."),
                doc("c", "Ignored words here.", FilterStatus.REJECTED_DUPLICATE)]
        s = corpus_statistics(docs)
        assert (s.policy_count, s.total_words, s.total_sentences) == (2, 7, 3)
        assert s.mean_words_per_policy == 3.5

    def test_coverage_two_policies(self):
        s = corpus_statistics([doc("a", "x."), doc("b", "y.")], [ann("a", 0, GdprLabel.CPI), ann("b", 0, GdprLabel.CPI)])
        assert s.per_label_coverage_pct[GdprLabel.CPI] == 100.0
        assert s.per_label_coverage_pct[GdprLabel.RA] == 0.0

    def test_coverage_one_of_four(self):
        docs = [doc(p, "x.") for p in "abcd"]
        s = corpus_statistics(docs, [ann("a", 0, GdprLabel.RA), ann("a", 1, GdprLabel.RA, "one two")])
        assert s.per_label_coverage_pct[GdprLabel.RA] == 25.0
        assert s.per_label_frequency[GdprLabel.RA] == 2
        assert s.per_label_avg_words[GdprLabel.RA] == 2.5

    def test_unknown_policy(self):
        with pytest.raises(DataError, match="zzz"):
            corpus_statistics([doc("a", "x.")], [ann("zzz", 0, GdprLabel.CPI)])

    def test_table(self):
        table = corpus_statistics([doc("a", "x.")], [ann("a", 0, GdprLabel.CPI)]).to_table()
        assert table.splitlines()[1].split() == ["CPI", "1", "100.00", "3.00"]
        assert table.splitlines()[-1].startswith("Other")

    @settings(max_examples=40)
    @given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from(ALL_LABELS)), max_size=40))
    def test_frequencies_sum_to_annotation_count(self, rows):
        docs = [doc(p, "x.") for p in "abc"]
        anns = [ann(p, i, lb) for i, (p, lb) in enumerate(rows)]
        s = corpus_statistics(docs, anns)
        assert sum(s.per_label_frequency.values()) == len(anns)
        assert all(0.0 <= v <= 100.0 for v in s.per_label_coverage_pct.values())
