"""Per-label precision/recall/F1 scoring and consensus merging of annotations."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from gdpraudit import _kernels
from gdpraudit.classifier import AnnotatedSentence, Prediction, format_refs
from gdpraudit.errors import DataError
from gdpraudit.labels import ALL_LABELS, GDPR_LABELS, LABEL_INDEX, GdprLabel
from gdpraudit.textstats import Sentence


@dataclass(frozen=True)
class AnnotationTriple:
    sentence: Sentence
    labels: tuple[GdprLabel, GdprLabel, GdprLabel]

    def __post_init__(self):
        if len(self.labels) != 3:
            raise DataError(f"expected 3 annotator labels for {self.sentence.ref}, got {len(self.labels)}")

    @classmethod
    def from_dict(cls, row: dict) -> "AnnotationTriple":
        sentence = Sentence(str(row["policy_id"]), int(row["sentence_index"]), str(row.get("text", "")))
        return cls(sentence, tuple(GdprLabel.parse(s) for s in row["labels"]))


def merge_annotations(
    triples: Sequence[AnnotationTriple],
) -> tuple[list[AnnotatedSentence], list[tuple[str, int]]]:
    """Unanimous triples become gold; anything else is queued as a dispute.

    Disputes are never resolved by majority vote: they need a human decision
    that is re-imported as a gold annotation.
    """
    gold: list[AnnotatedSentence] = []
    disputes: list[tuple[str, int]] = []
    for t in triples:
        if t.labels[0] == t.labels[1] == t.labels[2]:
            gold.append(AnnotatedSentence(t.sentence, t.labels[0]))
        else:
            disputes.append(t.sentence.ref)
    return gold, disputes


def read_triples(path: str | Path) -> list[AnnotationTriple]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(AnnotationTriple.from_dict(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad annotation triple ({exc})") from exc
    return out


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    support: int = 0


def _prf(tp: int, fp: int, fn: int) -> LabelScore:
    # zero denominators score 0, not NaN
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision and recall else 0.0
    return LabelScore(precision, recall, f1, tp + fn)


@dataclass
class EvaluationReport:
    per_label: dict[GdprLabel, LabelScore]
    macro: LabelScore
    other_row: LabelScore
    confusion: np.ndarray
    labels: tuple[GdprLabel, ...] = ALL_LABELS

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.total) if self.total else 0.0

    def to_dict(self) -> dict:
        def row(s: LabelScore) -> dict:
            return {"precision": s.precision, "recall": s.recall, "f1": s.f1}

        return {
            "per_label": {lb.value: dict(row(s), support=s.support) for lb, s in self.per_label.items()},
            "macro": row(self.macro),
            "other": row(self.other_row),
            "accuracy": self.accuracy,
            "labels": [lb.value for lb in self.labels],
            "confusion": self.confusion.tolist(),
        }

    def to_table(self) -> str:
        """Plain-text P/R/F table: the 10 rules, their macro average, then Other."""
        lines = [f"{'':<6} {'P':>5} {'R':>5} {'F':>5} {'n':>6}"]
        for lb in GDPR_LABELS:
            s = self.per_label[lb]
            lines.append(f"{lb.value:<6} {s.precision:5.2f} {s.recall:5.2f} {s.f1:5.2f} {s.support:6d}")
        m = self.macro
        lines.append(f"{'Avg':<6} {m.precision:5.2f} {m.recall:5.2f} {m.f1:5.2f}")
        o = self.other_row
        lines.append(f"{'Other':<6} {o.precision:5.2f} {o.recall:5.2f} {o.f1:5.2f} {o.support:6d}")
        return "\n".join(lines) + "\n"


def evaluate(gold: Sequence[AnnotatedSentence], predictions: Sequence[Prediction]) -> EvaluationReport:
    """Score predictions against gold labels.

    Predictions must cover exactly the gold sentences, matched on
    ``(policy_id, sentence_index)``. A label never predicted has precision 0;
    a label absent from gold has recall 0; F1 is 0 unless both are positive.
    The macro row is the unweighted mean over the 10 GDPR labels only.
    """
    gold_by_ref: dict[tuple[str, int], GdprLabel] = {}
    for g in gold:
        if g.ref in gold_by_ref:
            raise DataError(f"duplicate gold annotation for {g.ref}")
        gold_by_ref[g.ref] = g.label
    pred_by_ref: dict[tuple[str, int], GdprLabel] = {}
    for p in predictions:
        if p.ref in pred_by_ref:
            raise DataError(f"duplicate prediction for {p.ref}")
        pred_by_ref[p.ref] = p.label
    missing = sorted(set(gold_by_ref) - set(pred_by_ref))
    extra = sorted(set(pred_by_ref) - set(gold_by_ref))
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing predictions: {format_refs(missing)}")
        if extra:
            parts.append(f"extra predictions: {format_refs(extra)}")
        raise DataError("prediction/gold coverage mismatch; " + "; ".join(parts))

    refs = list(gold_by_ref)
    true_idx = np.array([LABEL_INDEX[gold_by_ref[r]] for r in refs], dtype=np.int64)
    pred_idx = np.array([LABEL_INDEX[pred_by_ref[r]] for r in refs], dtype=np.int64)
    confusion = _kernels.confusion_counts(true_idx, pred_idx, len(ALL_LABELS))

    per_label = {}
    for lb in ALL_LABELS:
        k = LABEL_INDEX[lb]
        tp = int(confusion[k, k])
        per_label[lb] = _prf(tp, int(confusion[:, k].sum()) - tp, int(confusion[k, :].sum()) - tp)
    rule_scores = [per_label[lb] for lb in GDPR_LABELS]
    macro = LabelScore(
        float(np.mean([s.precision for s in rule_scores])),
        float(np.mean([s.recall for s in rule_scores])),
        float(np.mean([s.f1 for s in rule_scores])),
        sum(s.support for s in rule_scores),
    )
    return EvaluationReport(per_label, macro, per_label[GdprLabel.OTHER], confusion)


def stratified_split(
    items: Sequence[AnnotatedSentence], train_fraction: float, seed: int
) -> tuple[list[AnnotatedSentence], list[AnnotatedSentence]]:
    """Per-label shuffled split; ``round(n * train_fraction)`` of each label go to train.

    Both halves keep the input order of the items they contain.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train fraction must be in (0, 1), got {train_fraction}")
    by_label: dict[GdprLabel, list[int]] = defaultdict(list)
    for i, item in enumerate(items):
        by_label[item.label].append(i)
    rng = np.random.default_rng(seed)
    train_ids: set[int] = set()
    for lb in ALL_LABELS:
        ids = by_label.get(lb, [])
        if not ids:
            continue
        shuffled = rng.permutation(len(ids))
        n_train = int(round(len(ids) * train_fraction))
        train_ids.update(ids[j] for j in shuffled[:n_train])
    train = [it for i, it in enumerate(items) if i in train_ids]
    test = [it for i, it in enumerate(items) if i not in train_ids]
    return train, test
