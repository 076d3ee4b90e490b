"""Native ROUGE: clipped n-gram overlap (R1, R2) and LCS-based RL.

No stemming and no stopword removal; both settings are recorded in report
metadata so corpus numbers are reproducible. RL computes the LCS over the
full token sequences of candidate and reference.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Literal, Sequence

from .documents import tokenize

Variant = Literal["R1", "R2", "RL"]

ROUGE_CONFIG = {"stemming": False, "stopword_removal": False, "lcs": "summary-level"}


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


def _words(text: str) -> list[str]:
    return [text[a:b] for a, b in tokenize(text)]


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngram_score(cand: Sequence[str], ref: Sequence[str], n: int) -> RougeScore:
    if len(cand) < n or len(ref) < n:
        return RougeScore(0.0, 0.0, 0.0, degenerate=True)
    cand_counts = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
    ref_counts = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
    overlap = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    precision = overlap / sum(cand_counts.values())
    recall = overlap / sum(ref_counts.values())
    return RougeScore(precision, recall, _f1(precision, recall))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Classic two-row dynamic program."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _lcs_score(cand: Sequence[str], ref: Sequence[str]) -> RougeScore:
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0, degenerate=True)
    lcs = lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge(candidate: str, reference: str, variant: Variant) -> RougeScore:
    """Precision/recall/F1 for one (candidate, reference) pair.

    Degenerate token lengths produce zeros with the ``degenerate`` flag set
    instead of raising.
    """
    cand, ref = _words(candidate), _words(reference)
    if variant == "R1":
        return _ngram_score(cand, ref, 1)
    if variant == "R2":
        return _ngram_score(cand, ref, 2)
    if variant == "RL":
        return _lcs_score(cand, ref)
    raise ValueError(f"unknown ROUGE variant: {variant!r}")


def corpus_rouge(
    pairs: Sequence[tuple[str, str]], variants: Sequence[Variant] = ("R1", "R2", "RL")
) -> dict[str, dict[str, float]]:
    """Mean precision/recall/F1 per variant over (candidate, reference) pairs."""
    if not pairs:
        raise ValueError("no pairs to score")
    out: dict[str, dict[str, float]] = {}
    for variant in variants:
        scores = [rouge(c, r, variant) for c, r in pairs]
        out[variant] = {
            "precision": sum(s.precision for s in scores) / len(scores),
            "recall": sum(s.recall for s in scores) / len(scores),
            "f1": sum(s.f1 for s in scores) / len(scores),
        }
    return out
