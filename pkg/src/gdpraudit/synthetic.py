"""Synthetic keyword corpora with known labels, for tests, demos and benchmarks.

Every label owns a small keyword vocabulary and sentences are padded with
shared filler words, so a label is recoverable from its keywords by
construction. ``confusion`` plants rule keywords into Other sentences to make
the task ambiguous enough that class priors matter.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from gdpraudit.classifier import AnnotatedSentence, Prediction
from gdpraudit.labels import ALL_LABELS, GDPR_LABELS, GdprLabel
from gdpraudit.textstats import Sentence

KEYWORDS: dict[GdprLabel, tuple[str, ...]] = {
    GdprLabel.CPI: ("collect", "gather", "obtain", "acquire"),
    GdprLabel.DRP: ("retain", "retention", "duration", "archive"),
    GdprLabel.DPP: ("purposes", "analytics", "personalise", "marketing"),
    GdprLabel.CD: ("contact", "email", "postal", "officer"),
    GdprLabel.RA: ("access", "copy", "inspect", "view"),
    GdprLabel.RRE: ("rectify", "erase", "correct", "delete"),
    GdprLabel.RRP: ("restrict", "restriction", "suspend", "limit"),
    GdprLabel.ROP: ("object", "objection", "oppose", "refuse"),
    GdprLabel.RDP: ("portability", "transfer", "export", "portable"),
    GdprLabel.RLC: ("complaint", "lodge", "supervisory", "regulator"),
    GdprLabel.OTHER: ("cookies", "browser", "children", "newsletter", "links", "updates"),
}

FILLER = tuple(
    """we the your and of to in for our this that with may you is are by on
    services information when use will which any as or such other users website
    account these from at can all under policy time some it be about if us
    their those where how also has been more provide through each""".split()
)


def make_sentence(
    rng: np.random.Generator,
    label: GdprLabel,
    length: tuple[int, int] = (5, 10),
    confusion: float = 0.0,
    keywords_per_sentence: int = 2,
) -> str:
    n = int(rng.integers(length[0], length[1] + 1))
    words = [FILLER[k] for k in rng.integers(0, len(FILLER), size=n)]
    keywords = KEYWORDS[label]
    for _ in range(keywords_per_sentence):
        words.insert(int(rng.integers(0, len(words) + 1)), keywords[int(rng.integers(0, len(keywords)))])
    if label is GdprLabel.OTHER and confusion > 0 and rng.random() < confusion:
        decoy = GDPR_LABELS[int(rng.integers(0, len(GDPR_LABELS)))]
        words.insert(int(rng.integers(0, len(words) + 1)), KEYWORDS[decoy][int(rng.integers(0, 4))])
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def annotated_corpus(
    counts: Mapping[GdprLabel, int] | int,
    seed: int,
    n_policies: int = 10,
    confusion: float = 0.0,
) -> list[AnnotatedSentence]:
    """Labelled sentences spread round-robin over ``n_policies`` policies.

    ``counts`` maps label to sentence count, or gives one count for all 11
    labels. Sentences are shuffled before policy assignment; indices within
    each policy are contiguous from 0.
    """
    if isinstance(counts, int):
        counts = {lb: counts for lb in ALL_LABELS}
    rng = np.random.default_rng(seed)
    labels = [lb for lb in ALL_LABELS for _ in range(counts.get(lb, 0))]
    labels = [labels[k] for k in rng.permutation(len(labels))]
    next_index = [0] * n_policies
    out = []
    for t, lb in enumerate(labels):
        p = t % n_policies
        text = make_sentence(rng, lb, confusion=confusion)
        out.append(AnnotatedSentence(Sentence(f"syn-{p:03d}", next_index[p], text), lb))
        next_index[p] += 1
    return out


def policy_text(
    rng: np.random.Generator,
    rules: Sequence[GdprLabel],
    other_sentences: int = 30,
) -> tuple[str, list[GdprLabel]]:
    """An HTML policy containing one sentence per rule in ``rules`` plus Other filler.

    Returns the HTML and the true label of each sentence in document order
    (one ``<p>`` per sentence).
    """
    labels = list(rules) + [GdprLabel.OTHER] * other_sentences
    labels = [labels[k] for k in rng.permutation(len(labels))]
    paras = "\n".join(f"<p>{make_sentence(rng, lb)}</p>" for lb in labels)
    html = (
        "<html><head><title>Privacy Policy</title><style>p {margin: 0}</style></head>\n"
        f"<body>\n{paras}\n<script>track();</script>\n</body></html>\n"
    )
    return html, labels


def oracle_predictions(policy_id: str, labels: Sequence[GdprLabel]) -> list[Prediction]:
    return [Prediction(policy_id, i, lb) for i, lb in enumerate(labels)]
