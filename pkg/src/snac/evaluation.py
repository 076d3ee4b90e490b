"""Score coherence-error detectors against span-annotated gold.

Covers binary sentence classification, ROC/AUC, fine-grained per-category
metrics with span overlap, category-wise recall at a fixed precision level,
and gold-set reconstruction from annotator subsets. Humans are scored on the
exact same code path as models by converting a held-out annotator's spans
into prediction records.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .annotations import AggregatedSet, AnnotationSet, aggregate_annotators
from .documents import Span, SummaryDocument
from .errors import (
    CompletenessError,
    LeakageError,
    SchemaError,
    SingleClassError,
    UnachievablePrecisionError,
)
from .taxonomy import CategoryGroup, ErrorCategory

SentenceKey = tuple[str, int]


@dataclass(frozen=True)
class FineEntry:
    """One predicted (category, span) tuple; SceneE entries carry no span."""

    category: ErrorCategory
    span: Span | None = None


@dataclass(frozen=True)
class PredictionRecord:
    """A detector's output for one sentence.

    ``score`` is real-valued with higher meaning more likely erroneous;
    detectors whose convention is the opposite (entity grid, LM) must be
    negated on ingestion. ``has_error`` carries hard labels when no score
    exists. ``fine`` lists predicted (category, span) tuples.
    """

    doc_id: str
    sentence_index: int
    score: float | None = None
    has_error: bool | None = None
    fine: tuple[FineEntry, ...] | None = None

    def __post_init__(self) -> None:
        if self.score is None and self.has_error is None:
            raise ValueError("a prediction needs a score or a hard label")

    @property
    def key(self) -> SentenceKey:
        return (self.doc_id, self.sentence_index)


@dataclass(frozen=True)
class GoldError:
    category: ErrorCategory
    start: int
    end: int


@dataclass(frozen=True)
class GoldSentence:
    """Gold state of one sentence: binary coherence label plus error tuples."""

    doc_id: str
    sentence_index: int
    has_error: bool
    errors: frozenset[GoldError] = frozenset()

    def __post_init__(self) -> None:
        coherence = any(
            e.category.group is CategoryGroup.COHERENCE for e in self.errors
        )
        if coherence != self.has_error:
            raise ValueError(
                "has_error must reflect the presence of coherence-group errors"
            )

    @property
    def key(self) -> SentenceKey:
        return (self.doc_id, self.sentence_index)

    @property
    def categories(self) -> set[ErrorCategory]:
        return {e.category for e in self.errors}


def build_gold(agg: AggregatedSet, doc: SummaryDocument) -> list[GoldSentence]:
    """Per-sentence gold from an aggregated set; spans are clipped to sentences."""
    if agg.doc_id != doc.doc_id:
        raise ValueError(f"set for {agg.doc_id!r} does not match document {doc.doc_id!r}")
    out: list[GoldSentence] = []
    for i, sent in enumerate(doc.sentences):
        errors = set()
        for ann in agg.annotations:
            if ann.span.overlaps(sent.start, sent.end):
                errors.add(
                    GoldError(
                        ann.category,
                        max(ann.span.start, sent.start),
                        min(ann.span.end, sent.end),
                    )
                )
        has_error = any(e.category.group is CategoryGroup.COHERENCE for e in errors)
        out.append(GoldSentence(doc.doc_id, i, has_error, frozenset(errors)))
    return out


def _pair_predictions(
    preds: Sequence[PredictionRecord], gold: Sequence[GoldSentence]
) -> list[tuple[PredictionRecord, GoldSentence]]:
    by_key: dict[SentenceKey, PredictionRecord] = {}
    for p in preds:
        if p.key in by_key:
            raise ValueError(f"duplicate prediction for {p.key}")
        by_key[p.key] = p
    missing = [g.key for g in gold if g.key not in by_key]
    if missing:
        raise CompletenessError("predictions are missing gold sentences", missing)
    return [(by_key[g.key], g) for g in gold]


def _positive(pred: PredictionRecord, threshold: float | None) -> bool:
    if pred.has_error is not None:
        return pred.has_error
    if threshold is None:
        raise ValueError(
            f"prediction for {pred.key} is score-only; a threshold is required"
        )
    assert pred.score is not None
    return pred.score >= threshold


# -- binary -----------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    precision_defined: bool = True


def binary_metrics(
    preds: Sequence[PredictionRecord],
    gold: Sequence[GoldSentence],
    threshold: float | None = None,
) -> BinaryMetrics:
    """Standard P/R/F1 with has_error as the positive class.

    With no positive predictions, precision is reported as 0 with
    ``precision_defined`` cleared so result tables stay rectangular.
    """
    tp = fp = fn = tn = 0
    for pred, gold_sentence in _pair_predictions(preds, gold):
        positive = _positive(pred, threshold)
        if positive and gold_sentence.has_error:
            tp += 1
        elif positive:
            fp += 1
        elif gold_sentence.has_error:
            fn += 1
        else:
            tn += 1
    precision_defined = (tp + fp) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return BinaryMetrics(precision, recall, f1, tp, fp, fn, tn, precision_defined)


# -- ROC ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RocResult:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), ties grouped
    thresholds: tuple[float, ...]
    auc: float


def roc_curve(
    preds: Sequence[PredictionRecord], gold: Sequence[GoldSentence]
) -> RocResult:
    """TPR/FPR at every distinct score threshold; AUC by the trapezoid rule."""
    pairs = _pair_predictions(preds, gold)
    scored: list[tuple[float, bool]] = []
    for pred, gold_sentence in pairs:
        if pred.score is None:
            raise ValueError(f"prediction for {pred.key} has no score; ROC needs scores")
        scored.append((pred.score, gold_sentence.has_error))
    n_pos = sum(1 for _, y in scored if y)
    n_neg = len(scored) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC requires both classes in the gold labels")

    scored.sort(key=lambda item: -item[0])
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    thresholds: list[float] = []
    tp = fp = 0
    i = 0
    while i < len(scored):
        j = i
        while j < len(scored) and scored[j][0] == scored[i][0]:
            if scored[j][1]:
                tp += 1
            else:
                fp += 1
            j += 1
        thresholds.append(scored[i][0])
        points.append((fp / n_neg, tp / n_pos))
        i = j

    auc = 0.0
    for (x1, y1), (x2, y2) in zip(points, points[1:]):
        auc += (x2 - x1) * (y1 + y2) / 2.0
    return RocResult(tuple(points), tuple(thresholds), auc)


# -- fine-grained ---------------------------------------------------------------------


@dataclass(frozen=True)
class FineMetrics:
    category: ErrorCategory
    precision: float
    recall: float
    f1: float
    overlap_fraction: float
    tp: int
    fp: int
    fn: int
    precision_defined: bool = True
    overlap_defined: bool = True


def finegrained_metrics(
    preds: Sequence[PredictionRecord],
    gold: Sequence[GoldSentence],
    category: ErrorCategory,
    docs: Mapping[str, SummaryDocument],
) -> FineMetrics:
    """(sentence, category) presence metrics plus span-overlap fraction.

    A true positive is a sentence where both prediction and gold carry the
    category. Among TPs, predicted spans must share at least one token with
    some gold span of the category to count as overlapping; SceneE, which
    carries no predicted span by convention, counts as full overlap.
    Predictions with a missing fine list are treated as predicting nothing.
    """
    if not isinstance(category, ErrorCategory):
        raise ValueError(f"unknown category: {category!r}")
    tp = fp = fn = 0
    overlap_hits = 0
    overlap_total = 0
    for pred, gold_sentence in _pair_predictions(preds, gold):
        fine = pred.fine or ()
        predicted = [e for e in fine if e.category is category]
        gold_has = category in gold_sentence.categories
        if predicted and gold_has:
            tp += 1
            if category is ErrorCategory.SceneE:
                overlap_total += 1
                overlap_hits += 1
            else:
                spans = [e.span for e in predicted if e.span is not None]
                if spans:
                    overlap_total += 1
                    doc = docs.get(pred.doc_id)
                    if doc is None:
                        raise KeyError(f"no document for {pred.doc_id!r}")
                    if _any_token_overlap(spans, gold_sentence, category, doc):
                        overlap_hits += 1
        elif predicted:
            fp += 1
        elif gold_has:
            fn += 1
    precision_defined = (tp + fp) > 0
    precision = tp / (tp + fp) if precision_defined else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    overlap_defined = overlap_total > 0
    overlap = overlap_hits / overlap_total if overlap_defined else 0.0
    return FineMetrics(
        category, precision, recall, f1, overlap, tp, fp, fn,
        precision_defined, overlap_defined,
    )


def _any_token_overlap(
    spans: Sequence[Span],
    gold_sentence: GoldSentence,
    category: ErrorCategory,
    doc: SummaryDocument,
) -> bool:
    gold_spans = [e for e in gold_sentence.errors if e.category is category]
    for span in spans:
        pred_tokens = doc.token_indices_in_range(span.start, span.end)
        for gold_error in gold_spans:
            if pred_tokens & doc.token_indices_in_range(gold_error.start, gold_error.end):
                return True
    return False


# -- recall at fixed precision ---------------------------------------------------------


@dataclass(frozen=True)
class RecallAtPrecision:
    target_precision: float
    threshold: float
    achieved_precision: float
    per_category: Mapping[ErrorCategory, float]
    overall: float
    credited: Mapping[ErrorCategory, int] = field(default_factory=dict)
    totals: Mapping[ErrorCategory, int] = field(default_factory=dict)


def recall_at_precision(
    preds: Sequence[PredictionRecord],
    gold: Sequence[GoldSentence],
    target_precision: float = 0.7,
) -> RecallAtPrecision:
    """Category-wise recall at the threshold whose precision sits closest above target.

    A binary-positive prediction counts as recalling every gold category
    present in that sentence; this deliberately overestimates recall and is
    reported as the upper-bound comparison it is. If no threshold achieves
    the target precision, the maximum achievable precision is reported in
    the raised error.
    """
    pairs = _pair_predictions(preds, gold)
    for pred, _ in pairs:
        if pred.score is None:
            raise ValueError(f"prediction for {pred.key} has no score")

    candidates = sorted({p.score for p, _ in pairs}, reverse=True)
    best: tuple[float, float, int] | None = None  # (precision, threshold, n_positive)
    max_precision = 0.0
    for threshold in candidates:
        tp = fp = 0
        for pred, gold_sentence in pairs:
            if pred.score >= threshold:
                if gold_sentence.has_error:
                    tp += 1
                else:
                    fp += 1
        if tp + fp == 0:
            continue
        precision = tp / (tp + fp)
        max_precision = max(max_precision, precision)
        if precision >= target_precision:
            positives = tp + fp
            if (
                best is None
                or precision < best[0]
                or (precision == best[0] and positives > best[2])
            ):
                best = (precision, threshold, positives)
    if best is None:
        raise UnachievablePrecisionError(target_precision, max_precision)
    achieved_precision, threshold, _ = best

    credited: dict[ErrorCategory, int] = defaultdict(int)
    totals: dict[ErrorCategory, int] = defaultdict(int)
    for pred, gold_sentence in pairs:
        positive = pred.score >= threshold
        for category in gold_sentence.categories:
            totals[category] += 1
            if positive:
                credited[category] += 1
    per_category = {
        category: credited[category] / totals[category] for category in totals
    }
    total_gold = sum(totals.values())
    overall = sum(credited.values()) / total_gold if total_gold else 0.0
    return RecallAtPrecision(
        target_precision,
        threshold,
        achieved_precision,
        per_category,
        overall,
        dict(credited),
        dict(totals),
    )


def fine_recall_at_threshold(
    preds: Sequence[PredictionRecord],
    gold: Sequence[GoldSentence],
    threshold: float,
) -> dict[ErrorCategory, float]:
    """Per-category recall using fine lists instead of the binary expansion rule.

    A gold (sentence, category) counts as recalled only when the sentence is
    predicted positive at the threshold AND its fine list names the category.
    Always bounded above by the expansion-rule recall at the same threshold.
    """
    credited: dict[ErrorCategory, int] = defaultdict(int)
    totals: dict[ErrorCategory, int] = defaultdict(int)
    for pred, gold_sentence in _pair_predictions(preds, gold):
        positive = pred.score is not None and pred.score >= threshold
        fine_categories = {e.category for e in (pred.fine or ())}
        for category in gold_sentence.categories:
            totals[category] += 1
            if positive and category in fine_categories:
                credited[category] += 1
    return {c: credited[c] / totals[c] for c in totals}


# -- gold reconstruction and human predictors -------------------------------------------


def reconstruct_eval_subset(
    sets_by_doc: Mapping[str, Sequence[AnnotationSet]],
    docs: Mapping[str, SummaryDocument],
    k: int = 2,
    seed: int = 0,
) -> dict[str, AggregatedSet]:
    """Aggregate k randomly chosen annotators per summary into a gold set.

    Choices are drawn per document from a seed derived from (seed, doc_id),
    so results are reproducible and independent of corpus composition.
    """
    out: dict[str, AggregatedSet] = {}
    for doc_id in sorted(sets_by_doc):
        sets = list(sets_by_doc[doc_id])
        annotators = sorted({a for s in sets for a in s.annotator_ids})
        if len(annotators) < k:
            raise ValueError(
                f"summary {doc_id!r} has {len(annotators)} annotators, needs {k}"
            )
        rng = random.Random(f"{seed}:{doc_id}")
        chosen = set(rng.sample(annotators, k))
        kept = [
            AnnotationSet.build(
                doc_id,
                [a for a in s.annotations if a.annotator_id in chosen],
                annotator_ids=s.annotator_ids & chosen,
                likert={r: v for r, v in s.likert.items() if r in chosen},
            )
            for s in sets
            if s.annotator_ids & chosen
        ]
        out[doc_id] = aggregate_annotators(kept, docs[doc_id])
    return out


def human_as_predictor(
    annotator_set: AnnotationSet,
    gold_set: AggregatedSet,
    doc: SummaryDocument,
) -> list[PredictionRecord]:
    """Convert a held-out annotator's spans into hard-label prediction records.

    The annotator must not be part of the gold aggregation. SceneE fine
    entries drop their span (whole-sentence convention); other spans are
    clipped to the sentence.
    """
    overlap = annotator_set.annotator_ids & gold_set.annotator_ids
    if overlap:
        raise LeakageError(
            f"annotator(s) {sorted(overlap)} appear in the gold aggregation"
        )
    return predictions_from_annotations(annotator_set, doc)


def predictions_from_annotations(
    s: AnnotationSet | AggregatedSet, doc: SummaryDocument
) -> list[PredictionRecord]:
    records: list[PredictionRecord] = []
    for i, sent in enumerate(doc.sentences):
        fine: list[FineEntry] = []
        has_error = False
        for ann in s.annotations:
            if not ann.span.overlaps(sent.start, sent.end):
                continue
            if ann.category.group is CategoryGroup.COHERENCE:
                has_error = True
            if ann.category is ErrorCategory.SceneE:
                fine.append(FineEntry(ann.category, None))
            else:
                clipped = Span(
                    max(ann.span.start, sent.start),
                    min(ann.span.end, sent.end),
                    ann.span.segment_index,
                )
                fine.append(FineEntry(ann.category, clipped))
        records.append(
            PredictionRecord(
                doc_id=doc.doc_id,
                sentence_index=i,
                has_error=has_error,
                fine=tuple(fine),
            )
        )
    return records


# -- prediction file I/O -----------------------------------------------------------------


def load_predictions(
    path: str | Path, *, invert_scores: bool = False
) -> list[PredictionRecord]:
    """JSON lines: {doc_id, sentence_index, score?|label?, fine?: [{category, start?, end?}]}.

    ``label`` uses the y convention (0 = erroneous). ``invert_scores`` negates
    scores on ingestion for detectors where lower means more erroneous.
    """
    records: list[PredictionRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                score = row.get("score")
                if score is not None:
                    score = -float(score) if invert_scores else float(score)
                has_error = None
                if row.get("label") is not None:
                    has_error = int(row["label"]) == 0
                fine = None
                if row.get("fine") is not None:
                    fine = tuple(
                        FineEntry(
                            ErrorCategory(entry["category"]),
                            Span(int(entry["start"]), int(entry["end"]), 0)
                            if entry.get("start") is not None
                            else None,
                        )
                        for entry in row["fine"]
                    )
                records.append(
                    PredictionRecord(
                        doc_id=str(row["doc_id"]),
                        sentence_index=int(row["sentence_index"]),
                        score=score,
                        has_error=has_error,
                        fine=fine,
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SchemaError(
                    f"malformed prediction: {exc}", path=str(path), line=lineno
                ) from exc
    return records


def save_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            row: dict = {"doc_id": record.doc_id, "sentence_index": record.sentence_index}
            if record.score is not None:
                row["score"] = record.score
            if record.has_error is not None:
                row["label"] = 0 if record.has_error else 1
            if record.fine is not None:
                row["fine"] = [
                    {
                        "category": entry.category.value,
                        **(
                            {"start": entry.span.start, "end": entry.span.end}
                            if entry.span is not None
                            else {}
                        ),
                    }
                    for entry in record.fine
                ]
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
