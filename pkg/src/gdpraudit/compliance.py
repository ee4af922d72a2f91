"""Rule-presence checks per policy and corpus-level compliance/readability aggregates."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from gdpraudit.classifier import Prediction
from gdpraudit.errors import DataError
from gdpraudit.labels import GDPR_LABELS, GdprLabel

log = logging.getLogger(__name__)

# (name, smallest present-rule count) high to low; the top bucket is closed at 1.0
BUCKETS = (
    ("[0.8,1.0]", 8),
    ("[0.6,0.8)", 6),
    ("[0.4,0.6)", 4),
    ("[0.2,0.4)", 2),
    ("[0,0.2)", 0),
)
BUCKET_ORDER = tuple(name for name, _ in reversed(BUCKETS))


def bucket_for(present_count: int) -> str:
    for name, lower in BUCKETS:
        if present_count >= lower:
            return name
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class ComplianceReport:
    policy_id: str
    rule_present: dict[GdprLabel, bool]
    evidence: dict[GdprLabel, list[int]]

    @property
    def present_count(self) -> int:
        return sum(self.rule_present.values())

    @property
    def compliance_rate(self) -> float:
        return self.present_count / len(GDPR_LABELS)

    @property
    def violations(self) -> list[GdprLabel]:
        return [lb for lb in GDPR_LABELS if not self.rule_present[lb]]

    def to_dict(self, sentence_text: Mapping[int, str] | None = None) -> dict:
        """JSON form; with ``sentence_text`` each evidence index carries its quoted sentence."""
        evidence = {}
        for lb in GDPR_LABELS:
            idxs = self.evidence.get(lb, [])
            if sentence_text is None:
                evidence[lb.value] = list(idxs)
            else:
                evidence[lb.value] = [{"sentence_index": i, "text": sentence_text.get(i, "")} for i in idxs]
        return {
            "policy_id": self.policy_id,
            "compliance_rate": self.compliance_rate,
            "rule_present": {lb.value: self.rule_present[lb] for lb in GDPR_LABELS},
            "violations": [lb.value for lb in self.violations],
            "evidence": evidence,
        }


def check_policy(
    predictions: Sequence[Prediction],
    policy_id: str | None = None,
    min_evidence: int = 1,
) -> ComplianceReport:
    """A rule is present when at least ``min_evidence`` sentences are predicted with its label."""
    if min_evidence < 1:
        raise DataError("min_evidence must be >= 1")
    ids = {p.policy_id for p in predictions}
    if policy_id is not None:
        ids.add(policy_id)
    if len(ids) > 1:
        raise DataError(f"predictions span several policies: {sorted(ids)}")
    pid = ids.pop() if ids else ""
    if not predictions:
        log.warning("policy %r has no classified sentences; every rule is reported absent", pid)

    hits: dict[GdprLabel, list[int]] = defaultdict(list)
    for p in predictions:
        if p.label.is_rule:
            hits[p.label].append(p.sentence_index)
    rule_present = {lb: len(hits[lb]) >= min_evidence for lb in GDPR_LABELS}
    evidence = {lb: sorted(hits[lb]) for lb in GDPR_LABELS if rule_present[lb]}
    return ComplianceReport(pid, rule_present, evidence)


@dataclass(frozen=True)
class CorpusComplianceSummary:
    policy_count: int
    bucket_pct: dict[str, float]
    per_rule_pct: dict[GdprLabel, float]
    mean_compliance_pct: float

    def to_dict(self) -> dict:
        return {
            "policy_count": self.policy_count,
            "bucket_pct": dict(self.bucket_pct),
            "per_rule_pct": {lb.value: v for lb, v in self.per_rule_pct.items()},
            "mean_compliance_pct": self.mean_compliance_pct,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("table", "key", "percent"))
        for name in BUCKET_ORDER:
            w.writerow(("bucket", name, f"{self.bucket_pct[name]:.2f}"))
        for lb, v in self.per_rule_pct.items():
            w.writerow(("rule", lb.value, f"{v:.2f}"))
        w.writerow(("mean", "compliance", f"{self.mean_compliance_pct:.2f}"))
        return buf.getvalue()


def summarize_corpus(reports: Sequence[ComplianceReport]) -> CorpusComplianceSummary:
    if not reports:
        raise DataError("no compliance reports to summarize")
    seen: set[str] = set()
    for r in reports:
        if r.policy_id in seen:
            raise DataError(f"duplicate policy id {r.policy_id!r}")
        seen.add(r.policy_id)
    n = len(reports)
    counts = {name: 0 for name in BUCKET_ORDER}
    for r in reports:
        counts[bucket_for(r.present_count)] += 1
    bucket_pct = {name: 100.0 * counts[name] / n for name in BUCKET_ORDER}
    per_rule_pct = {lb: 100.0 * sum(r.rule_present[lb] for r in reports) / n for lb in GDPR_LABELS}
    mean_pct = 100.0 * sum(r.present_count for r in reports) / (len(GDPR_LABELS) * n)
    return CorpusComplianceSummary(n, bucket_pct, per_rule_pct, mean_pct)


# -- readability aggregates ----------------------------------------------------------

READABILITY_FIELDS = ("word_count", "sentence_count", "asl", "fre", "fkg", "smog", "ari")


def describe(values: Sequence[float]) -> dict:
    """Count, mean, sample standard deviation (n-1), min and max; NaN-free input only."""
    vals = [float(v) for v in values]
    if not vals:
        return {"n": 0, "mean": None, "sd": None, "min": None, "max": None}
    return {
        "n": len(vals),
        "mean": statistics.fmean(vals),
        "sd": statistics.stdev(vals) if len(vals) > 1 else None,
        "min": min(vals),
        "max": max(vals),
    }


def summarize_readability(rows: Sequence[Mapping[str, float | None]]) -> dict[str, dict]:
    """Aggregate per-policy readability rows field by field, skipping missing values."""
    out = {}
    for name in READABILITY_FIELDS:
        vals = [r[name] for r in rows if r.get(name) is not None and not math.isnan(r[name])]
        out[name] = describe(vals)
    return out


def readability_summary_csv(summary: Mapping[str, Mapping]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("field", "n", "mean", "sd", "min", "max"))
    for name, d in summary.items():
        w.writerow(
            (name, d["n"]) + tuple("" if d[k] is None else f"{d[k]:.2f}" for k in ("mean", "sd", "min", "max"))
        )
    return buf.getvalue()
