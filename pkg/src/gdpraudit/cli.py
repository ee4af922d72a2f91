"""``gdpraudit`` command line: ingest, stats, merge, train, evaluate, classify, audit, report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import re
import sys
from pathlib import Path

from gdpraudit import classifier, compliance, corpus, evaluation, readability, textstats
from gdpraudit.errors import DataError
from gdpraudit.labels import GDPR_LABELS

log = logging.getLogger("gdpraudit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
OUTPUT_DIR_ENV = "GDPRAUDIT_OUTPUT_DIR"
FORMATS = ("json", "csv", "markdown")
POLICY_CSV_FIELDS = (
    "policy_id", "compliance_rate", "violations", "word_count", "sentence_count", "asl",
    "fre", "fre_band", "fkg", "smog", "smog_band", "ari",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _safe_name(policy_id: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", policy_id)
    if safe != policy_id or not safe:
        safe += "-" + hashlib.sha1(policy_id.encode("utf-8")).hexdigest()[:8]
    return safe


def _parse_split(text: str) -> float:
    m = re.fullmatch(r"(\d+)/(\d+)", text.strip())
    if not m or int(m.group(1)) == 0 or int(m.group(2)) == 0:
        raise UsageError(f"--split must look like 80/20 with both parts > 0, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    return a / (a + b)


def _training_config(args) -> classifier.TrainingConfig:
    return classifier.TrainingConfig(
        l2=args.l2,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        lr_decay=args.lr_decay,
        min_df=args.min_df,
        oversample=args.oversample,
    )


# -- ingest / stats / merge ---------------------------------------------------------


def _ingest(args) -> list[corpus.PolicyDocument]:
    manifest = corpus.load_manifest(args.manifest)
    return corpus.ingest(
        manifest,
        min_bytes=args.min_bytes,
        language_threshold=args.language_threshold,
        size_on=args.size_on,
        workers=args.workers,
    )


def _unreadable(docs) -> list[corpus.PolicyDocument]:
    return [d for d in docs if d.filter_status is corpus.FilterStatus.REJECTED_UNREADABLE]


def cmd_ingest(args) -> int:
    docs = _ingest(args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus.write_corpus(out, docs)
    counts = corpus.status_counts(docs)
    ingestion_log = {
        "manifest": str(args.manifest),
        "documents": len(docs),
        "status_counts": counts,
        "errors": [{"id": d.id, "error": d.error} for d in _unreadable(docs)],
    }
    _write(Path(args.log) if args.log else out.with_name(out.name + ".log.json"), _dump(ingestion_log))
    for status, n in counts.items():
        log.info("%-20s %d", status, n)
    if args.strict and _unreadable(docs):
        log.error("%d document(s) could not be read", len(_unreadable(docs)))
        return EXIT_IO
    return EXIT_OK


def cmd_stats(args) -> int:
    docs = corpus.read_corpus(args.corpus)
    annotations = classifier.read_annotations(args.annotations) if args.annotations else []
    stats = corpus.corpus_statistics(docs, annotations)
    if args.out:
        _write(Path(args.out), _dump(stats.to_dict()))
    sys.stdout.write(
        f"policies: {stats.policy_count}  words: {stats.total_words}  sentences: {stats.total_sentences}  "
        f"mean words/policy: {stats.mean_words_per_policy:.1f}\n"
    )
    if annotations:
        sys.stdout.write(stats.to_table())
    return EXIT_OK


def cmd_merge(args) -> int:
    gold, disputes = evaluation.merge_annotations(evaluation.read_triples(args.triples))
    classifier.write_annotations(args.gold_out, gold)
    if args.disputes_out:
        _write(
            Path(args.disputes_out),
            "".join(json.dumps({"policy_id": p, "sentence_index": i}) + "\n" for p, i in disputes),
        )
    log.info("%d unanimous, %d disputed", len(gold), len(disputes))
    return EXIT_OK


# -- train / evaluate / classify ------------------------------------------------------


def cmd_train(args) -> int:
    items = classifier.read_annotations(args.annotations)
    config = _training_config(args)
    fraction = _parse_split(args.split)
    train_set, test_set = evaluation.stratified_split(items, fraction, args.split_seed)
    model = classifier.train(train_set, config, seed=args.seed)
    model.training_meta["split"] = args.split
    model.training_meta["split_seed"] = args.split_seed
    _write(Path(args.model_out), model.to_json())
    if not test_set:
        log.warning("held-out split is empty; no evaluation report")
        return EXIT_OK
    preds = classifier.predict(model, [a.sentence for a in test_set])
    report = evaluation.evaluate(test_set, preds)
    if args.report_out:
        _write(Path(args.report_out), _dump(report.to_dict()))
    sys.stdout.write(report.to_table())
    return EXIT_OK


def cmd_evaluate(args) -> int:
    gold = classifier.read_annotations(args.gold)
    preds = classifier.read_predictions(args.predictions)
    report = evaluation.evaluate(gold, preds)
    if args.out:
        _write(Path(args.out), _dump(report.to_dict()))
    sys.stdout.write(report.to_table())
    return EXIT_OK


def _policy_sentences(docs) -> dict[str, list[textstats.Sentence]]:
    return {d.id: textstats.segment_sentences(d.cleaned_text, d.id) for d in docs if d.accepted}


def cmd_classify(args) -> int:
    if not args.model and not args.sentences_out:
        raise UsageError("nothing to do: give --model/--out and/or --sentences-out")
    if bool(args.model) != bool(args.out):
        raise UsageError("--model and --out go together")
    by_policy = _policy_sentences(corpus.read_corpus(args.corpus))
    sentences = [s for ss in by_policy.values() for s in ss]
    if args.sentences_out:
        textstats.write_sentences(args.sentences_out, sentences)
    if args.model:
        model = classifier.ClassifierModel.load(args.model)
        classifier.write_predictions(args.out, classifier.predict(model, sentences))
    log.info("%d sentences from %d policies", len(sentences), len(by_policy))
    return EXIT_OK


# -- audit / report -----------------------------------------------------------------------


def _fmt(v, digits=2) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def render_markdown(summary: dict) -> str:
    """Markdown tables: compliance buckets, per-rule presence, readability, per-policy rows."""
    comp = summary["compliance"]
    out = ["# Privacy policy audit", ""]
    out.append(f"Policies audited: {comp['policy_count']}  ")
    out.append(f"Mean compliance: {comp['mean_compliance_pct']:.2f}%")
    out += ["", "## Compliance rate distribution", "", "| Compliance rate | Policies (%) |", "|---|---:|"]
    for name in compliance.BUCKET_ORDER:
        out.append(f"| {name} | {comp['bucket_pct'][name]:.2f} |")
    out += ["", "## Compliance per rule", "", "| Rule | Description | Policies with rule (%) |", "|---|---|---:|"]
    for lb in GDPR_LABELS:
        out.append(f"| {lb.value} | {lb.description} | {comp['per_rule_pct'][lb.value]:.2f} |")
    out += ["", "## Readability", "", "| Measure | Mean | SD | Min | Max |", "|---|---:|---:|---:|---:|"]
    for name, d in summary["readability"].items():
        out.append(f"| {name} | {_fmt(d['mean'])} | {_fmt(d['sd'])} | {_fmt(d['min'])} | {_fmt(d['max'])} |")
    out += [
        "",
        "## Policies",
        "",
        "| Policy | Compliance | Violations | Words | Sentences | FRE | FRE band | FKG | SMOG | ARI |",
        "|---|---:|---|---:|---:|---:|---|---:|---:|---:|",
    ]
    for p in summary["policies"]:
        r = p["readability"] or {}
        out.append(
            f"| {p['policy_id']} | {100 * p['compliance_rate']:.0f}% | {', '.join(p['violations']) or '-'} "
            f"| {p['word_count']} | {p['sentence_count']} | {_fmt(r.get('fre'))} | {r.get('fre_band', '-')} "
            f"| {_fmt(r.get('fkg'))} | {_fmt(r.get('smog'))} | {_fmt(r.get('ari'))} |"
        )
    return "\n".join(out) + "\n"


def _policies_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(POLICY_CSV_FIELDS)
    for p in rows:
        r = p["readability"] or {}
        w.writerow((
            p["policy_id"], f"{p['compliance_rate']:.1f}", " ".join(p["violations"]),
            p["word_count"], p["sentence_count"],
            "" if p["asl"] is None else f"{p['asl']:.2f}",
            *("" if r.get(k) is None else (f"{r[k]:.2f}" if isinstance(r[k], float) else r[k])
              for k in POLICY_CSV_FIELDS[6:]),
        ))
    return buf.getvalue()


def cmd_audit(args) -> int:
    formats = args.format or list(FORMATS)
    out_dir = Path(args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or "audit-out")
    if args.manifest:
        docs = _ingest(args)
        if _unreadable(docs):
            log.warning("%d document(s) could not be read", len(_unreadable(docs)))
    else:
        docs = corpus.read_corpus(args.corpus)
    by_policy = _policy_sentences(docs)
    sentences = [s for ss in by_policy.values() for s in ss]
    if args.model:
        predictions = classifier.predict(classifier.ClassifierModel.load(args.model), sentences)
    else:
        predictions = classifier.import_predictions(args.predictions, sentences)
    preds_by_policy: dict[str, list[classifier.Prediction]] = {pid: [] for pid in by_policy}
    for p in predictions:
        preds_by_policy[p.policy_id].append(p)

    policies = []
    reports = []
    problems = 0
    for pid, sents in by_policy.items():
        report = compliance.check_policy(preds_by_policy[pid], policy_id=pid, min_evidence=args.min_evidence)
        reports.append(report)
        stats = textstats.compute_statistics(sents) if sents else textstats.TextStatistics()
        try:
            read = readability.readability_report(stats).to_dict()
        except readability.ReadabilityUndefined as exc:
            log.warning("%s: %s", pid, exc)
            problems += 1
            read = None
        text_by_index = {s.index: s.text for s in sents}
        policies.append({
            "policy_id": pid,
            "compliance_rate": report.compliance_rate,
            "violations": [lb.value for lb in report.violations],
            **stats.to_dict(),
            "readability": read,
            "_compliance": report.to_dict(text_by_index),
        })
    if not reports:
        raise DataError("no accepted policies to audit")
    corpus_summary = compliance.summarize_corpus(reports)
    read_rows = [
        {"word_count": p["word_count"], "sentence_count": p["sentence_count"], "asl": p["asl"],
         **{k: (p["readability"] or {}).get(k) for k in ("fre", "fkg", "smog", "ari")}}
        for p in policies
    ]
    read_summary = compliance.summarize_readability(read_rows)
    summary = {
        "config": {
            "source": str(args.manifest or args.corpus),
            "classifier": {"model": args.model} if args.model else {"predictions": args.predictions},
            "min_evidence": args.min_evidence,
            "seed": args.seed,
        },
        "compliance": corpus_summary.to_dict(),
        "readability": read_summary,
        "policies": [{k: v for k, v in p.items() if k != "_compliance"} for p in policies],
    }

    if "json" in formats:
        stat_fields = list(textstats.TextStatistics().to_dict())
        for p in policies:
            name = _safe_name(p["policy_id"]) + ".json"
            _write(out_dir / "compliance" / name, _dump(p["_compliance"]))
            payload = {
                "policy_id": p["policy_id"],
                "readability": p["readability"],
                "text_statistics": {k: p[k] for k in stat_fields},
            }
            _write(out_dir / "readability" / name, _dump(payload))
    # summary.json is always written: `report` re-renders from it
    _write(out_dir / "summary.json", _dump(summary))
    if "csv" in formats:
        _write(out_dir / "compliance_summary.csv", corpus_summary.to_csv())
        _write(out_dir / "readability_summary.csv", compliance.readability_summary_csv(read_summary))
        _write(out_dir / "policies.csv", _policies_csv(summary["policies"]))
    if "markdown" in formats:
        _write(out_dir / "report.md", render_markdown(summary))
    log.info(
        "%d policies, mean compliance %.2f%%, output in %s",
        corpus_summary.policy_count, corpus_summary.mean_compliance_pct, out_dir,
    )
    if args.strict and (problems or (args.manifest and _unreadable(docs))):
        return EXIT_DATA
    return EXIT_OK


def cmd_report(args) -> int:
    summary = json.loads((Path(args.audit_dir) / "summary.json").read_text(encoding="utf-8"))
    text = render_markdown(summary)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def _add_ingest_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--min-bytes", type=int, default=corpus.DEFAULT_MIN_BYTES,
                   help="minimum document size in bytes (default: %(default)s)")
    p.add_argument("--language-threshold", type=float, default=corpus.DEFAULT_LANGUAGE_THRESHOLD,
                   help="minimum English stopword ratio (default: %(default)s)")
    p.add_argument("--size-on", choices=("raw", "text"), default="raw",
                   help="measure size on raw bytes or on cleaned text")
    p.add_argument("--workers", type=int, default=1, help="threads for reading/cleaning")


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    d = classifier.TrainingConfig()
    p.add_argument("--oversample", action="store_true", help="randomly oversample minority labels")
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--learning-rate", type=float, default=d.learning_rate)
    p.add_argument("--lr-decay", type=float, default=d.lr_decay)
    p.add_argument("--l2", type=float, default=d.l2)
    p.add_argument("--min-df", type=int, default=d.min_df)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gdpraudit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="read, clean and filter the documents of a manifest")
    p.add_argument("manifest", help="CSV or JSON manifest")
    p.add_argument("--out", required=True, help="corpus record (JSON lines)")
    p.add_argument("--log", help="ingestion log path (default: <out>.log.json)")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any document failed to load")
    _add_ingest_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="corpus and per-label annotation statistics")
    p.add_argument("corpus")
    p.add_argument("--annotations", help="gold annotations (JSON lines)")
    p.add_argument("--out", help="write statistics JSON here")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("merge", help="merge three-annotator labels into gold + disputes")
    p.add_argument("triples")
    p.add_argument("--gold-out", required=True)
    p.add_argument("--disputes-out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("train", help="train the native classifier and score it on a held-out split")
    p.add_argument("annotations")
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", default="80/20", help="train/test proportions (default: %(default)s)")
    p.add_argument("--split-seed", type=int, default=0)
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score predictions against gold annotations")
    p.add_argument("gold")
    p.add_argument("predictions")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="segment a corpus and classify its sentences")
    p.add_argument("corpus")
    p.add_argument("--model")
    p.add_argument("--out", help="predictions (JSON lines)")
    p.add_argument("--sentences-out", help="also export the segmented sentences")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("audit", help="compliance and readability audit of a corpus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="corpus record from `ingest`")
    src.add_argument("--manifest", help="manifest to ingest first")
    clf = p.add_mutually_exclusive_group(required=True)
    clf.add_argument("--model", help="native model JSON")
    clf.add_argument("--predictions", help="externally produced predictions (JSON lines)")
    p.add_argument("--out-dir", help=f"output directory (default: ${OUTPUT_DIR_ENV} or ./audit-out)")
    p.add_argument("--format", action="append", choices=FORMATS, help="repeatable; default all")
    p.add_argument("--min-evidence", type=int, default=1, help="sentences needed for a rule to count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true")
    _add_ingest_flags(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", help="render the markdown report of an audit directory")
    p.add_argument("audit_dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=level, force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
