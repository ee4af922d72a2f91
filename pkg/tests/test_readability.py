import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gdpraudit.readability import (
    FreBand,
    ReadabilityReport,
    ReadabilityUndefined,
    automated_readability_index,
    flesch_kincaid_grade,
    flesch_reading_ease,
    fre_band,
    readability_report,
    reports_to_csv,
    smog_band,
    smog_index,
)
from gdpraudit.textstats import TextStatistics, compute_statistics, segment_sentences

# ASL = 20, ASW = 1.5, ALW = 5
BASE = TextStatistics(word_count=200, sentence_count=10, syllable_count=300, letter_count=1000)


def test_fre_hand_value():
    # 206.835 - 1.015*20 - 84.6*1.5 = 206.835 - 20.3 - 126.9
    assert flesch_reading_ease(BASE) == pytest.approx(59.635, abs=1e-9)
    assert fre_band(flesch_reading_ease(BASE)) is FreBand.FAIRLY_DIFFICULT


def test_fkg_hand_values():
    # 0.39*20 + 11.8*1.5 - 15.59 = 7.8 + 17.7 - 15.59
    assert flesch_kincaid_grade(BASE) == pytest.approx(9.91, abs=1e-9)
    # syllable-free token stream: 0.39*40 - 15.59
    stats = TextStatistics(word_count=400, sentence_count=10, syllable_count=0, letter_count=0)
    assert flesch_kincaid_grade(stats) == pytest.approx(0.01, abs=1e-9)


def test_fkg_consistent_with_reported_mean():
    # ASL ~ 28 and ASW ~ 1.58 put the grade near 14
    stats = TextStatistics(word_count=2800, sentence_count=100, syllable_count=4424, letter_count=14000)
    assert flesch_kincaid_grade(stats) == pytest.approx(14.0, abs=0.1)


def test_smog_hand_values():
    assert smog_index(TextStatistics(word_count=50, sentence_count=7, complex_word_count=0)) == 3.0
    s30 = smog_index(TextStatistics(word_count=500, sentence_count=30, complex_word_count=30))
    assert s30 == pytest.approx(math.sqrt(30) + 3, abs=1e-12)
    assert s30 == pytest.approx(8.477, abs=1e-3)
    s120 = smog_index(TextStatistics(word_count=500, sentence_count=30, complex_word_count=120))
    assert s120 == pytest.approx(13.954, abs=1e-3)
    assert smog_band(s120) == "some college"


def test_ari_hand_values():
    # 0.5*20 + 4.71*5 - 21.43
    assert automated_readability_index(BASE) == pytest.approx(12.12, abs=1e-9)
    # 0.5 * 42.86 = 21.43
    stats = TextStatistics(word_count=4286, sentence_count=100, syllable_count=4286, letter_count=0)
    assert abs(automated_readability_index(stats)) < 1e-9


@pytest.mark.parametrize("fn", [flesch_reading_ease, flesch_kincaid_grade, automated_readability_index, smog_index])
def test_undefined(fn):
    with pytest.raises(ReadabilityUndefined):
        fn(TextStatistics())


def test_ratio_metrics_need_words():
    stats = TextStatistics(word_count=0, sentence_count=3)
    with pytest.raises(ReadabilityUndefined):
        flesch_reading_ease(stats)
    assert smog_index(stats) == 3.0


@pytest.mark.parametrize(
    "score,band",
    [
        (150.0, FreBand.VERY_EASY),
        (100.0, FreBand.VERY_EASY),
        (90.0, FreBand.VERY_EASY),
        (89.99, FreBand.EASY),
        (85.0, FreBand.EASY),
        (80.0, FreBand.EASY),
        (75.0, FreBand.FAIRLY_EASY),
        (69.66, FreBand.STANDARD),
        (60.0, FreBand.STANDARD),
        (59.635, FreBand.FAIRLY_DIFFICULT),
        (50.0, FreBand.FAIRLY_DIFFICULT),
        (49.99, FreBand.DIFFICULT),
        (30.0, FreBand.DIFFICULT),
        (10.32, FreBand.VERY_DIFFICULT),
        (-20.0, FreBand.VERY_DIFFICULT),
    ],
)
def test_fre_bands(score, band):
    assert fre_band(score) is band


def test_fre_band_labels():
    assert FreBand.EASY.description == "easy" and FreBand.EASY.grade == "5th grade"
    assert FreBand.VERY_EASY.grade == "4th grade"
    assert FreBand.VERY_DIFFICULT.grade == "college graduate"


@pytest.mark.parametrize(
    "grade,band",
    [
        (3.0, "low-literate"),
        (6.99, "low-literate"),
        (7.0, "junior high school"),
        (8.5, "junior high school"),
        (9.0, "some high school"),
        (11.9, "some high school"),
        (12.0, "high school graduate"),
        (13.0, "some college"),
        (15.99, "some college"),
        (16.0, "university degree"),
        (17.0, "post-graduate studies"),
        (18.99, "post-graduate studies"),
        (19.0, "post-graduate degree"),
        (40.0, "post-graduate degree"),
        (-1.0, "low-literate"),
    ],
)
def test_smog_bands(grade, band):
    assert smog_band(grade) == band


def test_report_composes_metrics():
    stats = TextStatistics(word_count=600, sentence_count=30, syllable_count=900, letter_count=3000,
                           complex_word_count=120)
    r = readability_report(stats)
    assert r.fre == pytest.approx(59.635, abs=1e-9) and r.fre_band is FreBand.FAIRLY_DIFFICULT
    assert r.fkg == pytest.approx(9.91, abs=1e-9)
    assert r.smog == pytest.approx(math.sqrt(120) + 3, abs=1e-12) and r.smog_band == "some college"
    assert r.ari == pytest.approx(12.12, abs=1e-9)
    assert ReadabilityReport.from_dict(r.to_dict()) == r


def test_report_json_and_csv():
    r = readability_report(BASE)
    d = r.to_dict()
    assert d["fre"] == r.fre  # full precision
    assert d["fre_band"] == "FairlyDifficult"
    csv_text = reports_to_csv([("p1", r)])
    assert csv_text.splitlines()[1] == "p1,59.64,FairlyDifficult,9.91,3.00,low-literate,12.12"


def test_raw_scores_not_clamped():
    stats = TextStatistics(word_count=10, sentence_count=10, syllable_count=10, letter_count=30)
    assert flesch_reading_ease(stats) > 100
    assert fre_band(flesch_reading_ease(stats)) is FreBand.VERY_EASY


counts = st.integers(min_value=1, max_value=10_000)


@given(counts, counts, counts, counts, st.integers(1, 100))
def test_monotone_in_sentence_length(words, sentences, syllables, letters, extra):
    a = TextStatistics(words, sentences + extra, syllables, letters)
    b = TextStatistics(words, sentences, syllables, letters)  # longer sentences
    assert flesch_reading_ease(b) < flesch_reading_ease(a)
    assert flesch_kincaid_grade(b) > flesch_kincaid_grade(a)
    assert automated_readability_index(b) > automated_readability_index(a)


@given(counts, st.integers(0, 1000), st.integers(1, 100))
def test_smog_monotone(sentences, complex_words, extra):
    a = TextStatistics(10_000, sentences, complex_word_count=complex_words)
    b = TextStatistics(10_000, sentences, complex_word_count=complex_words + extra)
    assert smog_index(b) > smog_index(a)


@given(st.floats(allow_nan=False, allow_infinity=True))
def test_bands_total(x):
    assert isinstance(fre_band(x), FreBand)
    assert isinstance(smog_band(x), str)


@pytest.mark.parametrize("k", [2, 3, 7])
def test_scale_invariance(k):
    text = "We collect your personal information. You may object to processing at any time. Contact us."
    once = readability_report(compute_statistics(segment_sentences(text)))
    many = readability_report(compute_statistics(segment_sentences(" ".join([text] * k))))
    assert many == once
