"""Flesch reading ease, Flesch-Kincaid grade, SMOG and ARI with their score bands.

Raw metric values are never clamped; only the band lookups are. Where two
bands share an endpoint the endpoint belongs to the higher band, so a reading
ease of exactly 90 is "very easy" and a SMOG grade of exactly 13 is "some
college".
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

from gdpraudit.errors import DataError
from gdpraudit.textstats import TextStatistics


class ReadabilityUndefined(DataError):
    """Raised when a metric's ratio inputs are undefined (no words or sentences)."""


class FreBand(enum.Enum):
    VERY_EASY = ("VeryEasy", 90.0, "very easy", "4th grade")
    EASY = ("Easy", 80.0, "easy", "5th grade")
    FAIRLY_EASY = ("FairlyEasy", 70.0, "fairly easy", "6th grade")
    STANDARD = ("Standard", 60.0, "standard", "7th to 8th grade")
    FAIRLY_DIFFICULT = ("FairlyDifficult", 50.0, "fairly difficult", "some high school")
    DIFFICULT = ("Difficult", 30.0, "difficult", "high school or some college")
    VERY_DIFFICULT = ("VeryDifficult", -math.inf, "very difficult", "college graduate")

    def __init__(self, code: str, lower: float, description: str, grade: str):
        self.code = code
        self.lower = lower
        self.description = description
        self.grade = grade

    def __str__(self) -> str:
        return self.code


# (inclusive lower bound, band name); ordered high to low
SMOG_BANDS = (
    (19.0, "post-graduate degree"),
    (17.0, "post-graduate studies"),
    (16.0, "university degree"),
    (13.0, "some college"),
    (12.0, "high school graduate"),
    (9.0, "some high school"),
    (7.0, "junior high school"),
    (-math.inf, "low-literate"),
)


def fre_band(score: float) -> FreBand:
    if math.isnan(score):
        raise ReadabilityUndefined("reading ease is NaN")
    for band in FreBand:
        if score >= band.lower:
            return band
    raise AssertionError("unreachable")


def smog_band(grade: float) -> str:
    if math.isnan(grade):
        raise ReadabilityUndefined("SMOG grade is NaN")
    for lower, name in SMOG_BANDS:
        if grade >= lower:
            return name
    raise AssertionError("unreachable")


def _ratios(stats: TextStatistics) -> tuple[float, float, float]:
    if stats.sentence_count <= 0 or stats.word_count <= 0:
        raise ReadabilityUndefined(
            f"readability undefined: {stats.word_count} words in {stats.sentence_count} sentences"
        )
    return stats.asl, stats.asw, stats.alw


def flesch_reading_ease(stats: TextStatistics) -> float:
    asl, asw, _ = _ratios(stats)
    return 206.835 - 1.015 * asl - 84.6 * asw


def flesch_kincaid_grade(stats: TextStatistics) -> float:
    asl, asw, _ = _ratios(stats)
    return 0.39 * asl + 11.8 * asw - 15.59


def smog_index(stats: TextStatistics) -> float:
    """Whole-document SMOG: ``sqrt(complex_words * 30 / sentences) + 3``."""
    if stats.sentence_count <= 0:
        raise ReadabilityUndefined("readability undefined: no sentences")
    return math.sqrt(stats.complex_word_count * 30 / stats.sentence_count) + 3


def automated_readability_index(stats: TextStatistics) -> float:
    asl, _, alw = _ratios(stats)
    return 0.5 * asl + 4.71 * alw - 21.43


@dataclass(frozen=True)
class ReadabilityReport:
    fre: float
    fre_band: FreBand
    fkg: float
    smog: float
    smog_band: str
    ari: float

    def to_dict(self) -> dict:
        return {
            "fre": self.fre,
            "fre_band": self.fre_band.code,
            "fre_grade": self.fre_band.grade,
            "fkg": self.fkg,
            "smog": self.smog,
            "smog_band": self.smog_band,
            "ari": self.ari,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReadabilityReport":
        band = next(b for b in FreBand if b.code == d["fre_band"])
        return cls(d["fre"], band, d["fkg"], d["smog"], d["smog_band"], d["ari"])


def readability_report(stats: TextStatistics) -> ReadabilityReport:
    fre = flesch_reading_ease(stats)
    smog = smog_index(stats)
    return ReadabilityReport(
        fre=fre,
        fre_band=fre_band(fre),
        fkg=flesch_kincaid_grade(stats),
        smog=smog,
        smog_band=smog_band(smog),
        ari=automated_readability_index(stats),
    )


CSV_FIELDS = ("fre", "fre_band", "fkg", "smog", "smog_band", "ari")


def reports_to_csv(rows: list[tuple[str, ReadabilityReport]]) -> str:
    """One line per ``(policy_id, report)``; metric values rounded to 2 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("policy_id",) + CSV_FIELDS)
    for policy_id, r in rows:
        writer.writerow(
            (policy_id, f"{r.fre:.2f}", r.fre_band.code, f"{r.fkg:.2f}", f"{r.smog:.2f}", r.smog_band, f"{r.ari:.2f}")
        )
    return buf.getvalue()
