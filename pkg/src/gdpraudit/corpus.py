"""Policy ingestion: manifest loading, HTML cleaning, quality filters, corpus statistics."""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Sequence

from gdpraudit.classifier import AnnotatedSentence
from gdpraudit.errors import DataError
from gdpraudit.labels import ALL_LABELS, GDPR_LABELS, GdprLabel
from gdpraudit.textstats import segment_sentences, tokenize_words

log = logging.getLogger(__name__)

DEFAULT_MIN_BYTES = 2048
DEFAULT_LANGUAGE_THRESHOLD = 0.08

# fixed list of 100 common English function words
ENGLISH_STOPWORDS = frozenset(
    """
    a about above after again all an and any are as at be because been before
    being between both but by can could did do does down each few for from had
    has have he her here him his how i if in into is it its just me more most my
    no not of on only or other our out over she should so some such than that
    the their them then there these they this those through to too under until
    up us very was we were what when where which while who why will with you
    your
    """.split()
)


class FilterStatus(str, enum.Enum):
    ACCEPTED = "Accepted"
    REJECTED_NON_ENGLISH = "RejectedNonEnglish"
    REJECTED_TOO_SHORT = "RejectedTooShort"
    REJECTED_DUPLICATE = "RejectedDuplicate"
    # the file could not be read; ``PolicyDocument.error`` says why
    REJECTED_UNREADABLE = "RejectedUnreadable"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    company: str
    source_uri: str
    local_path: str
    jurisdiction: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    corpus_name: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for e in self.entries:
            if e.id in seen:
                raise DataError(f"duplicate manifest id {e.id!r}")
            seen.add(e.id)


MANIFEST_FIELDS = ("id", "company", "source_uri", "local_path")


def load_manifest(path: str | Path) -> CorpusManifest:
    """Read a CSV (header ``id,company,source_uri,local_path``) or JSON-array manifest.

    Relative ``local_path`` values are resolved against the manifest's directory.
    An optional ``jurisdiction`` column/field is carried through.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8-sig")
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        try:
            rows = json.loads(text) if text.strip() else []
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON manifest ({exc})") from exc
        if not isinstance(rows, list):
            raise DataError(f"{path}: JSON manifest must be an array")
    else:
        reader = csv.DictReader(text.splitlines())
        if reader.fieldnames is None:
            rows = []
        else:
            missing = [f for f in MANIFEST_FIELDS if f not in reader.fieldnames]
            if missing:
                raise DataError(f"{path}: manifest header lacks {', '.join(missing)}")
            rows = list(reader)
    entries = []
    for i, row in enumerate(rows):
        try:
            local = Path(row["local_path"])
            if not local.is_absolute():
                local = path.parent / local
            entries.append(
                ManifestEntry(
                    id=str(row["id"]),
                    company=str(row["company"]),
                    source_uri=str(row["source_uri"]),
                    local_path=str(local),
                    jurisdiction=row.get("jurisdiction") or None,
                )
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}: manifest entry {i} lacks field {exc}") from exc
    return CorpusManifest(tuple(entries), corpus_name=path.stem)


# -- HTML cleaning ---------------------------------------------------------------

_SKIP_TAGS = frozenset({"script", "style", "noscript", "template", "head", "svg"})
_BLOCK_TAGS = frozenset(
    """address article aside blockquote body caption dd details dialog div dl dt
    fieldset figcaption figure footer form h1 h2 h3 h4 h5 h6 header hr html li
    main nav ol p pre section summary table tbody td tfoot th thead title tr ul""".split()
)
_PARA = "\x00"
_LINE = "\x01"
_SPACES = re.compile(r"[^\S\n]+")


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self.skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self.skip_depth += 1
        elif tag == "br":
            self.parts.append(_LINE)
        elif tag in _BLOCK_TAGS:
            self.parts.append(_PARA)

    def handle_startendtag(self, tag, attrs):
        if tag == "br":
            self.parts.append(_LINE)
        elif tag in _BLOCK_TAGS:
            self.parts.append(_PARA)

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self.skip_depth = max(0, self.skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self.parts.append(_PARA)

    def handle_data(self, data):
        if not self.skip_depth:
            self.parts.append(data)


def clean_html(raw: bytes | str) -> str:
    """Plain text from HTML (or already-plain text).

    Script/style content is dropped, tags stripped and entities decoded.
    Block-level elements are separated by a blank line and ``<br>`` becomes
    a newline; blank lines already in the source are kept as paragraph
    breaks. Whitespace runs inside a line collapse to one space.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="replace")
    raw = raw.lstrip("\ufeff")
    raw = re.sub(r"\r\n?", "\n", raw)
    # blank lines in the source survive as paragraph breaks
    raw = re.sub(r"\n[^\S\n]*\n\s*", _PARA, raw)
    parser = _TextExtractor()
    try:
        parser.feed(raw)
        parser.close()
    except Exception:  # HTMLParser is lenient; this is a last resort
        log.warning("HTML parser failed; falling back to tag stripping")
        return clean_html(re.sub(r"<[^>]*>", " ", raw).encode())
    text = "".join(parser.parts)
    paragraphs = []
    for para in text.split(_PARA):
        lines = [_SPACES.sub(" ", ln).strip() for ln in para.replace(_LINE, "\n").split("\n")]
        lines = [ln for ln in lines if ln]
        if lines:
            paragraphs.append("\n".join(lines))
    return "\n\n".join(paragraphs)


def english_ratio(text: str) -> float:
    """Fraction of word tokens found in the fixed English stopword list."""
    words = tokenize_words(text)
    if not words:
        return 0.0
    return sum(w.lower() in ENGLISH_STOPWORDS for w in words) / len(words)


def dedup_key(cleaned_text: str) -> str:
    normalized = " ".join(cleaned_text.lower().split())
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


# -- documents ---------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyDocument:
    id: str
    company: str
    source_uri: str
    jurisdiction: str | None
    raw_bytes: bytes | None
    cleaned_text: str
    byte_size: int
    filter_status: FilterStatus
    error: str | None = None

    def __post_init__(self):
        if self.raw_bytes is not None and self.byte_size != len(self.raw_bytes):
            raise DataError(f"{self.id}: byte_size {self.byte_size} != len(raw_bytes) {len(self.raw_bytes)}")

    @property
    def accepted(self) -> bool:
        return self.filter_status is FilterStatus.ACCEPTED

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "company": self.company,
            "source_uri": self.source_uri,
            "jurisdiction": self.jurisdiction,
            "byte_size": self.byte_size,
            "filter_status": self.filter_status.value,
            "error": self.error,
            "cleaned_text": self.cleaned_text,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "PolicyDocument":
        return cls(
            id=str(row["id"]),
            company=str(row.get("company", "")),
            source_uri=str(row.get("source_uri", "")),
            jurisdiction=row.get("jurisdiction"),
            raw_bytes=None,
            cleaned_text=str(row.get("cleaned_text", "")),
            byte_size=int(row["byte_size"]),
            filter_status=FilterStatus(row["filter_status"]),
            error=row.get("error"),
        )


def _load_entry(entry: ManifestEntry) -> PolicyDocument:
    try:
        raw = Path(entry.local_path).read_bytes()
    except OSError as exc:
        log.warning("%s: cannot read %s (%s)", entry.id, entry.local_path, exc)
        return PolicyDocument(
            entry.id, entry.company, entry.source_uri, entry.jurisdiction,
            b"", "", 0, FilterStatus.REJECTED_UNREADABLE, error=str(exc),
        )
    return PolicyDocument(
        entry.id, entry.company, entry.source_uri, entry.jurisdiction,
        raw, clean_html(raw), len(raw), FilterStatus.ACCEPTED,
    )


def apply_filters(
    docs: Iterable[PolicyDocument],
    min_bytes: int = DEFAULT_MIN_BYTES,
    language_threshold: float = DEFAULT_LANGUAGE_THRESHOLD,
    size_on: str = "raw",
) -> list[PolicyDocument]:
    """Set each document's filter status: size, then language, then duplicates.

    Size is measured on the raw bytes, or on the UTF-8 cleaned text with
    ``size_on="text"``. Only documents passing the first two checks take part
    in deduplication; the first in input order is kept.
    """
    if min_bytes <= 0:
        raise DataError("min_bytes must be > 0")
    if not 0.0 <= language_threshold <= 1.0:
        raise DataError("language_threshold must be in [0, 1]")
    if size_on not in ("raw", "text"):
        raise DataError(f"size_on must be 'raw' or 'text', got {size_on!r}")
    seen: set[str] = set()
    out = []
    for doc in docs:
        if doc.filter_status is FilterStatus.REJECTED_UNREADABLE:
            out.append(doc)
            continue
        size = doc.byte_size if size_on == "raw" else len(doc.cleaned_text.encode("utf-8"))
        if size < min_bytes:
            status = FilterStatus.REJECTED_TOO_SHORT
        elif english_ratio(doc.cleaned_text) < language_threshold:
            status = FilterStatus.REJECTED_NON_ENGLISH
        else:
            key = dedup_key(doc.cleaned_text)
            if key in seen:
                status = FilterStatus.REJECTED_DUPLICATE
            else:
                seen.add(key)
                status = FilterStatus.ACCEPTED
        out.append(replace(doc, filter_status=status))
    return out


def ingest(
    manifest: CorpusManifest,
    min_bytes: int = DEFAULT_MIN_BYTES,
    language_threshold: float = DEFAULT_LANGUAGE_THRESHOLD,
    size_on: str = "raw",
    workers: int = 1,
) -> list[PolicyDocument]:
    """One document per manifest entry, in manifest order, with its filter status set.

    Reading and cleaning run on ``workers`` threads; filtering is a sequential
    pass afterwards, so the result does not depend on scheduling.
    """
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            docs = list(pool.map(_load_entry, manifest.entries))
    else:
        docs = [_load_entry(e) for e in manifest.entries]
    return apply_filters(docs, min_bytes, language_threshold, size_on)


def write_corpus(path: str | Path, docs: Iterable[PolicyDocument]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[PolicyDocument]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(PolicyDocument.from_dict(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad corpus record ({exc})") from exc
    return out


def status_counts(docs: Sequence[PolicyDocument]) -> dict[str, int]:
    counts = {s.value: 0 for s in FilterStatus}
    for d in docs:
        counts[d.filter_status.value] += 1
    return counts


# -- statistics ---------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusStatistics:
    policy_count: int
    total_words: int
    total_sentences: int
    per_label_frequency: dict[GdprLabel, int]
    per_label_coverage_pct: dict[GdprLabel, float]
    per_label_avg_words: dict[GdprLabel, float]

    @property
    def mean_words_per_policy(self) -> float:
        return self.total_words / self.policy_count if self.policy_count else 0.0

    def to_dict(self) -> dict:
        return {
            "policy_count": self.policy_count,
            "total_words": self.total_words,
            "total_sentences": self.total_sentences,
            "mean_words_per_policy": self.mean_words_per_policy,
            "per_label": {
                lb.value: {
                    "frequency": self.per_label_frequency[lb],
                    "coverage_pct": self.per_label_coverage_pct[lb],
                    "avg_words": self.per_label_avg_words[lb],
                }
                for lb in ALL_LABELS
            },
        }

    def to_table(self) -> str:
        lines = [f"{'Label':<6} {'Frequency':>9} {'Coverage (%)':>12} {'Avg.W':>6}"]
        for lb in GDPR_LABELS + (GdprLabel.OTHER,):
            lines.append(
                f"{lb.value:<6} {self.per_label_frequency[lb]:>9,d} "
                f"{self.per_label_coverage_pct[lb]:>12.2f} {self.per_label_avg_words[lb]:>6.2f}"
            )
        return "\n".join(lines) + "\n"


def corpus_statistics(
    docs: Sequence[PolicyDocument], annotations: Sequence[AnnotatedSentence] = ()
) -> CorpusStatistics:
    """Word/sentence totals over accepted documents plus per-label frequency,
    coverage (% of accepted policies with at least one sentence of the label)
    and mean words per annotated sentence.
    """
    accepted = [d for d in docs if d.accepted]
    ids = {d.id for d in accepted}
    total_words = total_sentences = 0
    for d in accepted:
        sentences = segment_sentences(d.cleaned_text, d.id)
        total_sentences += len(sentences)
        total_words += sum(len(tokenize_words(s.text)) for s in sentences)

    freq = {lb: 0 for lb in ALL_LABELS}
    words = {lb: 0 for lb in ALL_LABELS}
    policies: dict[GdprLabel, set[str]] = {lb: set() for lb in ALL_LABELS}
    for a in annotations:
        pid = a.sentence.policy_id
        if pid not in ids:
            raise DataError(f"annotation refers to unknown or rejected policy id {pid!r}")
        freq[a.label] += 1
        words[a.label] += len(tokenize_words(a.sentence.text))
        policies[a.label].add(pid)
    n = len(accepted)
    coverage = {lb: 100.0 * len(policies[lb]) / n if n else 0.0 for lb in ALL_LABELS}
    avg_words = {lb: words[lb] / freq[lb] if freq[lb] else 0.0 for lb in ALL_LABELS}
    return CorpusStatistics(n, total_words, total_sentences, freq, coverage, avg_words)
