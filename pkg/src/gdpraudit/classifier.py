"""Sentence classifier over the 11-label taxonomy.

The native model is a tf-idf (unigram + bigram) linear softmax classifier
trained with SGD on L2-regularized cross-entropy. Predictions made elsewhere,
e.g. by a fine-tuned transformer, come in through :func:`import_predictions`
and are interchangeable with native ones downstream.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from gdpraudit import _kernels
from gdpraudit.errors import DataError
from gdpraudit.labels import ALL_LABELS, GdprLabel
from gdpraudit.textstats import Sentence, tokenize_words

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence: Sentence
    label: GdprLabel

    @property
    def ref(self) -> tuple[str, int]:
        return self.sentence.ref

    def to_dict(self) -> dict:
        return {
            "policy_id": self.sentence.policy_id,
            "sentence_index": self.sentence.index,
            "text": self.sentence.text,
            "label": self.label.value,
        }

    @classmethod
    def from_dict(cls, row: dict) -> "AnnotatedSentence":
        sentence = Sentence(str(row["policy_id"]), int(row["sentence_index"]), str(row["text"]))
        return cls(sentence, GdprLabel.parse(row["label"]))


@dataclass(frozen=True)
class Prediction:
    policy_id: str
    sentence_index: int
    label: GdprLabel
    scores: dict = field(default_factory=dict, compare=False)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.policy_id, self.sentence_index)

    def to_dict(self) -> dict:
        row = {"policy_id": self.policy_id, "sentence_index": self.sentence_index, "label": self.label.value}
        if self.scores:
            row["scores"] = {lb.value: float(v) for lb, v in self.scores.items()}
        return row


@dataclass
class TrainingConfig:
    l2: float = 1e-2
    epochs: int = 100
    learning_rate: float = 0.1
    # epoch e uses learning_rate / (1 + lr_decay * e)
    lr_decay: float = 0.05
    min_df: int = 1
    oversample: bool = False

    def validate(self) -> None:
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")
        if self.learning_rate <= 0 or self.l2 < 0 or self.lr_decay < 0:
            raise DataError("learning_rate must be > 0; l2 and lr_decay >= 0")
        if self.min_df < 1:
            raise DataError("min_df must be >= 1")


# -- features -------------------------------------------------------------------


def extract_terms(text: str) -> list[str]:
    """Lowercased unigrams followed by space-joined bigrams."""
    words = [w.lower() for w in tokenize_words(text)]
    return words + [f"{a} {b}" for a, b in zip(words, words[1:])]


def build_vocabulary(texts: Sequence[str], min_df: int = 1) -> tuple[dict[str, int], np.ndarray]:
    """Vocabulary (sorted terms) and ``idf = ln(n_docs / df)`` per term."""
    df: Counter = Counter()
    for text in texts:
        df.update(set(extract_terms(text)))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    n = len(texts)
    vocabulary = {t: i for i, t in enumerate(terms)}
    idf = np.array([math.log(n / df[t]) for t in terms], dtype=np.float64)
    return vocabulary, idf


def featurize(sentence_text: str, vocabulary: dict[str, int], idf: np.ndarray) -> dict[int, float]:
    """Sparse L2-normalized tf-idf vector as ``{feature_index: value}``.

    Out-of-vocabulary terms are ignored; an empty result is the zero vector.
    """
    tf = Counter(vocabulary[t] for t in extract_terms(sentence_text) if t in vocabulary)
    vec = {j: c * idf[j] for j, c in sorted(tf.items())}
    norm = math.sqrt(sum(v * v for v in vec.values()))
    if norm == 0.0:
        return {}
    return {j: float(v / norm) for j, v in vec.items()}


def _to_csr(vectors: Iterable[dict[int, float]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vec in vectors:
        indices.extend(vec.keys())
        data.extend(vec.values())
        indptr.append(len(indices))
    return (
        np.asarray(indptr, dtype=np.int64),
        np.asarray(indices, dtype=np.int64),
        np.asarray(data, dtype=np.float64),
    )


# -- model ------------------------------------------------------------------------


@dataclass
class ClassifierModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    weights: np.ndarray
    bias: np.ndarray
    label_set: tuple[GdprLabel, ...]
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.weights.shape != (len(self.label_set), len(self.idf)):
            raise DataError(
                f"weights shape {self.weights.shape} does not match "
                f"{len(self.label_set)} labels x {len(self.idf)} features"
            )
        if self.bias.shape != (len(self.label_set),):
            raise DataError("bias length does not match label set")
        if any(not 0 <= j < len(self.idf) for j in self.vocabulary.values()):
            raise DataError("vocabulary index out of range")

    def to_json(self) -> str:
        doc = {
            "label_set": [lb.value for lb in self.label_set],
            "vocabulary": self.vocabulary,
            "idf": self.idf.tolist(),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "training_meta": self.training_meta,
        }
        return json.dumps(doc, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "ClassifierModel":
        try:
            doc = json.loads(text)
            return cls(
                vocabulary={str(k): int(v) for k, v in doc["vocabulary"].items()},
                idf=np.asarray(doc["idf"], dtype=np.float64),
                weights=np.asarray(doc["weights"], dtype=np.float64).reshape(len(doc["label_set"]), -1),
                bias=np.asarray(doc["bias"], dtype=np.float64),
                label_set=tuple(GdprLabel.parse(s) for s in doc["label_set"]),
                training_meta=dict(doc.get("training_meta", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed model document: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def oversample(train: Sequence[AnnotatedSentence], seed: int) -> list[AnnotatedSentence]:
    """Randomly duplicate minority-label examples until every label matches the majority.

    The output is the original list, in order, followed by the added copies
    (labels in canonical order), drawn uniformly with replacement.
    """
    if not train:
        raise DataError("cannot oversample an empty training set")
    by_label: dict[GdprLabel, list[AnnotatedSentence]] = defaultdict(list)
    for item in train:
        by_label[item.label].append(item)
    target = max(len(v) for v in by_label.values())
    rng = np.random.default_rng(seed)
    out = list(train)
    for label in ALL_LABELS:
        items = by_label.get(label)
        if not items or len(items) == target:
            continue
        picks = rng.integers(0, len(items), size=target - len(items))
        out.extend(items[k] for k in picks)
    return out


def train(
    train: Sequence[AnnotatedSentence],
    config: TrainingConfig | None = None,
    seed: int = 0,
) -> ClassifierModel:
    """Fit the tf-idf softmax model; deterministic for a given seed.

    Vocabulary and idf come from the training set as given; when
    ``config.oversample`` is set the duplicates only affect the SGD passes.
    """
    config = config or TrainingConfig()
    config.validate()
    present = {item.label for item in train}
    if len(present) < 2:
        raise DataError(f"degenerate training data: {len(present)} distinct label(s), need >= 2")
    label_set = tuple(lb for lb in ALL_LABELS if lb in present)
    vocabulary, idf = build_vocabulary([item.sentence.text for item in train], config.min_df)

    examples = oversample(train, seed) if config.oversample else list(train)
    pos = {lb: k for k, lb in enumerate(label_set)}
    y = np.array([pos[item.label] for item in examples], dtype=np.int64)
    indptr, indices, data = _to_csr(featurize(item.sentence.text, vocabulary, idf) for item in examples)

    rng = np.random.default_rng(seed)
    order = np.stack([rng.permutation(len(examples)) for _ in range(config.epochs)])
    rates = config.learning_rate / (1.0 + config.lr_decay * np.arange(config.epochs))
    weights = np.zeros((len(label_set), len(idf)))
    bias = np.zeros(len(label_set))
    # penalty is on the summed loss, so each sample step carries l2 / n of it
    _kernels.sgd_softmax(indptr, indices, data, y, order, rates, config.l2 / len(examples), weights, bias)

    meta = {"seed": seed, "examples": len(examples), "original_examples": len(train)}
    meta.update(asdict(config))
    meta["oversampled"] = meta.pop("oversample")
    return ClassifierModel(vocabulary, idf, weights, bias, label_set, meta)


def predict(model: ClassifierModel, sentences: Sequence[Sentence]) -> list[Prediction]:
    """Score every sentence; scores are the linear logits, the label their argmax.

    Ties go to the label that comes first in ``model.label_set``.
    """
    if not sentences:
        return []
    csr = _to_csr(featurize(s.text, model.vocabulary, model.idf) for s in sentences)
    scores = _kernels.linear_scores(*csr, model.weights, model.bias)
    best = np.argmax(scores, axis=1)
    return [
        Prediction(
            s.policy_id,
            s.index,
            model.label_set[best[i]],
            {lb: float(scores[i, k]) for k, lb in enumerate(model.label_set)},
        )
        for i, s in enumerate(sentences)
    ]


# -- prediction files ----------------------------------------------------------------


def _parse_prediction(row: dict) -> Prediction:
    try:
        policy_id = str(row["policy_id"])
        index = int(row["sentence_index"])
        label = GdprLabel.parse(row["label"])
    except KeyError as exc:
        raise DataError(f"prediction row missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"bad prediction row {row!r}: {exc}") from exc
    raw_scores = row.get("scores") or {}
    if not isinstance(raw_scores, dict):
        raise DataError(f"scores must be an object in row {row!r}")
    scores = {GdprLabel.parse(k): float(v) for k, v in raw_scores.items()}
    return Prediction(policy_id, index, label, scores)


def read_predictions(path: str | Path) -> list[Prediction]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(_parse_prediction(json.loads(line)))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
    return out


def write_predictions(path: str | Path, predictions: Iterable[Prediction]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in predictions:
            fh.write(json.dumps(p.to_dict()) + "\n")


def format_refs(refs: Sequence[tuple[str, int]], limit: int = 20) -> str:
    shown = ", ".join(f"({pid!r}, {idx})" for pid, idx in refs[:limit])
    if len(refs) > limit:
        shown += f", ... ({len(refs) - limit} more)"
    return shown


def import_predictions(path: str | Path, expected_sentences: Sequence[Sentence]) -> list[Prediction]:
    """Load externally produced predictions and align them to ``expected_sentences``.

    Rows are matched on ``(policy_id, sentence_index)`` and returned in the
    order of ``expected_sentences``. Label strings are trimmed before
    parsing. Missing sentences or duplicate rows raise :class:`DataError`;
    rows for sentences that were not expected are logged and dropped.
    """
    rows: dict[tuple[str, int], Prediction] = {}
    for p in read_predictions(path):
        if p.ref in rows:
            raise DataError(f"{path}: duplicate prediction for {p.ref}")
        rows[p.ref] = p
    expected = [s.ref for s in expected_sentences]
    missing = [ref for ref in expected if ref not in rows]
    if missing:
        raise DataError(f"{path}: no prediction for {len(missing)} sentence(s): {format_refs(missing)}")
    extra = sorted(set(rows) - set(expected))
    if extra:
        log.warning("%s: ignoring %d unexpected prediction row(s): %s", path, len(extra), format_refs(extra))
    return [rows[ref] for ref in expected]


# -- annotation files ------------------------------------------------------------------


def read_annotations(path: str | Path) -> list[AnnotatedSentence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(AnnotatedSentence.from_dict(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad annotation row ({exc})") from exc
    return out


def write_annotations(path: str | Path, items: Iterable[AnnotatedSentence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_dict(), ensure_ascii=False) + "\n")

