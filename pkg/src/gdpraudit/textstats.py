"""Sentence segmentation, word tokenization and the counts behind readability."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from gdpraudit.errors import DataError

ABBREVIATIONS = frozenset(
    {"mr", "mrs", "dr", "inc", "ltd", "e.g", "i.e", "etc", "no", "st", "vs"}
)

VOWELS = frozenset("aeiouy")

_PARAGRAPH_BREAK = re.compile(r"\n[^\S\n]*\n\s*")
_TERMINATOR = re.compile(r"[.!?]+[\"'”’)\]]*\s+")
_OPENERS = "\"'“‘(["
_WORD = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")


@dataclass(frozen=True)
class Sentence:
    policy_id: str
    index: int
    text: str

    @property
    def ref(self) -> tuple[str, int]:
        return (self.policy_id, self.index)

    def to_dict(self) -> dict:
        return {"policy_id": self.policy_id, "index": self.index, "text": self.text}

    @classmethod
    def from_dict(cls, row: dict) -> "Sentence":
        index = row.get("index", row.get("sentence_index"))
        if index is None:
            raise DataError(f"sentence row without index: {row!r}")
        return cls(str(row["policy_id"]), int(index), str(row["text"]))


def _split_paragraph(paragraph: str) -> Iterator[str]:
    start = 0
    for m in _TERMINATOR.finditer(paragraph):
        nxt = m.end()
        while nxt < len(paragraph) and paragraph[nxt] in _OPENERS:
            nxt += 1
        if nxt >= len(paragraph):
            continue
        ch = paragraph[nxt]
        if not (ch.isupper() or ch.isdigit()):
            continue
        punct = m.group().rstrip()
        if punct == ".":
            i = m.start()
            while i > start and (paragraph[i - 1].isalnum() or paragraph[i - 1] in "._"):
                i -= 1
            if paragraph[i:m.start()].lower() in ABBREVIATIONS:
                continue
        piece = paragraph[start:m.end()].strip()
        if piece:
            yield piece
        start = m.end()
    tail = paragraph[start:].strip()
    if tail:
        yield tail


def segment_sentences(text: str, policy_id: str = "") -> list[Sentence]:
    """Split ``text`` into sentences.

    A boundary is a run of ``.``, ``!`` or ``?`` (optionally followed by
    closing quotes or brackets) then whitespace then an uppercase letter or
    digit, or a blank line. A single period after a known abbreviation never
    splits. Sentence texts are stripped slices of the input, so no
    non-whitespace character is lost or reordered.
    """
    pieces: list[str] = []
    for paragraph in _PARAGRAPH_BREAK.split(text):
        pieces.extend(_split_paragraph(paragraph))
    return [Sentence(policy_id, i, piece) for i, piece in enumerate(pieces)]


def tokenize_words(text: str) -> list[str]:
    """Maximal alphanumeric runs, keeping internal apostrophes and hyphens."""
    return _WORD.findall(text)


_ONES = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = "_ _ twenty thirty forty fifty sixty seventy eighty ninety".split()
_SCALES = ((10**9, "billion"), (10**6, "million"), (1000, "thousand"), (100, "hundred"))


def _spoken_integer(n: int) -> list[str]:
    if n < 20:
        return [_ONES[n]]
    if n < 100:
        words = [_TENS[n // 10]]
        if n % 10:
            words.append(_ONES[n % 10])
        return words
    for scale, name in _SCALES:
        if n >= scale:
            words = _spoken_integer(n // scale) + [name]
            if n % scale:
                words += _spoken_integer(n % scale)
            return words
    raise AssertionError("unreachable")


def _vowel_groups(word: str) -> int:
    groups = 0
    prev_vowel = False
    for i, ch in enumerate(word):
        vowel = ch in VOWELS and not (ch == "y" and i == 0)
        if vowel and not prev_vowel:
            groups += 1
        prev_vowel = vowel
    return groups


def count_syllables(word: str, numbers: str = "simple") -> int:
    """Heuristic syllable count for a single token.

    Counts groups of consecutive vowels (``y`` only when not word-initial),
    drops a silent final ``e`` that follows a consonant unless that would
    leave zero, and never returns less than 1. Tokens without letters count
    as one syllable; with ``numbers="spoken"`` an all-digit token is counted
    as its English reading instead ("13" -> "thirteen" -> 2).
    """
    if numbers == "spoken" and word.isdigit() and len(word) <= 12:
        return sum(count_syllables(w) for w in _spoken_integer(int(word)))
    w = word.lower()
    groups = _vowel_groups(w)
    if groups > 1 and len(w) >= 2 and w[-1] == "e" and w[-2] not in VOWELS:
        groups -= 1
    return max(groups, 1)


def letter_count(word: str) -> int:
    return sum(1 for ch in word if ch.isalpha())


@dataclass(frozen=True)
class TextStatistics:
    word_count: int = 0
    sentence_count: int = 0
    syllable_count: int = 0
    letter_count: int = 0
    complex_word_count: int = 0
    long_word_count: int = 0

    @property
    def asl(self) -> float | None:
        """Words per sentence; None when there are no sentences."""
        return self.word_count / self.sentence_count if self.sentence_count else None

    @property
    def asw(self) -> float | None:
        return self.syllable_count / self.word_count if self.word_count else None

    @property
    def alw(self) -> float | None:
        return self.letter_count / self.word_count if self.word_count else None

    def __add__(self, other: "TextStatistics") -> "TextStatistics":
        if not isinstance(other, TextStatistics):
            return NotImplemented
        return TextStatistics(
            self.word_count + other.word_count,
            self.sentence_count + other.sentence_count,
            self.syllable_count + other.syllable_count,
            self.letter_count + other.letter_count,
            self.complex_word_count + other.complex_word_count,
            self.long_word_count + other.long_word_count,
        )

    def to_dict(self) -> dict:
        return {
            "word_count": self.word_count,
            "sentence_count": self.sentence_count,
            "syllable_count": self.syllable_count,
            "letter_count": self.letter_count,
            "complex_word_count": self.complex_word_count,
            "long_word_count": self.long_word_count,
            "asl": self.asl,
            "asw": self.asw,
            "alw": self.alw,
        }


def word_statistics(words: Iterable[str], sentence_count: int, numbers: str = "simple") -> TextStatistics:
    n_words = n_syll = n_letters = n_complex = n_long = 0
    for w in words:
        syl = count_syllables(w, numbers)
        n_words += 1
        n_syll += syl
        n_letters += letter_count(w)
        n_complex += syl >= 3
        n_long += len(w) > 6
    return TextStatistics(n_words, sentence_count, n_syll, n_letters, n_complex, n_long)


def compute_statistics(sentences: Iterable[Sentence], numbers: str = "simple") -> TextStatistics:
    """Sum word, syllable, letter and complex/long-word counts over sentences."""
    sentences = list(sentences)
    if not sentences:
        raise DataError("empty document")
    words = (w for s in sentences for w in tokenize_words(s.text))
    return word_statistics(words, len(sentences), numbers)


def write_sentences(path: str | Path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")


def read_sentences(path: str | Path) -> list[Sentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(Sentence.from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad sentence row ({exc})") from exc
    return out
