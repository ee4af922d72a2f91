import csv
from pathlib import Path

import numpy as np
import pytest

from gdpraudit import _kernels, synthetic
from gdpraudit.classifier import write_annotations, write_predictions
from gdpraudit.labels import GDPR_LABELS

# present-rule counts of the four synthetic policies; rates 1.0, 0.9, 0.3, 0.5
SYNTHETIC_RULE_COUNTS = (10, 9, 3, 5)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    if request.param == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    previous = _kernels.BACKEND
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(previous)


def build_synthetic_corpus(root: Path, seed: int = 0) -> dict:
    """Four HTML policies plus a too-short and a missing entry, with oracle predictions."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    predictions = []
    for i, k in enumerate(SYNTHETIC_RULE_COUNTS):
        html, labels = synthetic.policy_text(rng, GDPR_LABELS[:k])
        (root / f"policy{i}.html").write_text(html, encoding="utf-8")
        rows.append((f"mno-{i}", f"Operator {i}", f"https://example.org/{i}/privacy", f"policy{i}.html"))
        predictions += synthetic.oracle_predictions(f"mno-{i}", labels)
    (root / "short.html").write_bytes(b"<p>" + b"x" * 1000 + b"</p>")
    rows.append(("tiny", "Tiny Co", "https://example.org/tiny", "short.html"))
    with open(root / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("id", "company", "source_uri", "local_path"))
        w.writerows(rows)
    write_predictions(root / "predictions.jsonl", predictions)
    write_annotations(root / "gold.jsonl", synthetic.annotated_corpus(20, seed=seed))
    return {
        "root": root,
        "manifest": root / "manifest.csv",
        "predictions": root / "predictions.jsonl",
        "gold": root / "gold.jsonl",
    }


@pytest.fixture
def synthetic_corpus(tmp_path):
    return build_synthetic_corpus(tmp_path / "corpus")


# -- acceptance summary: one PASS/FAIL line per criterion ---------------------------------

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    marker = report.keywords.get("acceptance")
    if marker is None:
        return
    criterion = getattr(report, "criterion", None) or report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" or report.outcome != "passed":
        previous = _acceptance_results.get(criterion)
        if previous != "FAIL":
            _acceptance_results[criterion] = "PASS" if report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None and marker.args:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status in _acceptance_results.items():
        terminalreporter.write_line(f"{status}  {criterion}")
