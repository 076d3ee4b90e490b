"""Error annotations, per-annotator sets, validation, and annotator-union aggregation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .documents import Span, SummaryDocument
from .taxonomy import ErrorCategory

_CATEGORY_ORDER = {c: i for i, c in enumerate(ErrorCategory)}


@dataclass(frozen=True)
class ErrorAnnotation:
    """One error triple: a span, its category, and the annotator who marked it.

    Inconsistency and repetition errors additionally carry the earlier span
    they contradict or repeat. Category-specific constraints are checked by
    :func:`validate_annotation`, not at construction, so that invalid input
    can be represented and reported.
    """

    span: Span
    category: ErrorCategory
    annotator_id: str
    antecedent: Span | None = None

    def __post_init__(self) -> None:
        if not self.annotator_id:
            raise ValueError("annotator_id cannot be empty")


@dataclass(frozen=True)
class AnnotationSet:
    """All annotations for one summary by one or more annotators.

    ``annotator_ids`` may include annotators who marked nothing; that carries
    signal for agreement computations. ``likert`` maps annotator ids to their
    1-5 summary-level coherence rating, when collected.
    """

    doc_id: str
    annotations: tuple[ErrorAnnotation, ...]
    annotator_ids: frozenset[str]
    likert: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for ann in self.annotations:
            if ann.annotator_id not in self.annotator_ids:
                raise ValueError(
                    f"annotation by {ann.annotator_id!r} but annotator not in set"
                )
        for rater, score in self.likert.items():
            if rater not in self.annotator_ids:
                raise ValueError(f"likert rating by unknown annotator {rater!r}")
            if not 1 <= score <= 5:
                raise ValueError(f"likert score must be in [1, 5], got {score}")

    @staticmethod
    def build(
        doc_id: str,
        annotations: Iterable[ErrorAnnotation],
        *,
        annotator_ids: Iterable[str] | None = None,
        likert: Mapping[str, int] | None = None,
    ) -> "AnnotationSet":
        anns = tuple(annotations)
        ids = frozenset(annotator_ids) if annotator_ids is not None else frozenset(
            a.annotator_id for a in anns
        )
        return AnnotationSet(doc_id, anns, ids, dict(likert or {}))

    def by_annotator(self, annotator_id: str) -> tuple[ErrorAnnotation, ...]:
        return tuple(a for a in self.annotations if a.annotator_id == annotator_id)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def validate_annotation(ann: ErrorAnnotation, doc: SummaryDocument) -> list[Violation]:
    """Check one annotation against a segmented document.

    Returns every violated constraint; an empty list means the annotation is
    valid. Structural problems (span outside the text) are reported alongside
    the category-specific rules.
    """
    if not doc.is_segmented:
        raise ValueError("validate_annotation requires a segmented document")
    violations: list[Violation] = []
    span_ok = _check_span(ann.span, doc, "span", violations)

    if ann.category.requires_antecedent:
        if ann.antecedent is None:
            violations.append(
                Violation(
                    "antecedent-required",
                    f"{ann.category.value} requires an antecedent span",
                )
            )
        else:
            ante_ok = _check_span(ann.antecedent, doc, "antecedent", violations)
            if ante_ok and ann.antecedent.segment_index > ann.span.segment_index:
                violations.append(
                    Violation(
                        "antecedent-after-span",
                        "antecedent must come from the context or the same segment "
                        f"(segment {ann.antecedent.segment_index} > {ann.span.segment_index})",
                    )
                )
    elif ann.antecedent is not None:
        violations.append(
            Violation(
                "antecedent-forbidden",
                f"{ann.category.value} does not take an antecedent span",
            )
        )

    if ann.category.whole_sentence and span_ok:
        starts = {s.start for s in doc.sentences}
        ends = {s.end for s in doc.sentences}
        if ann.span.start not in starts or ann.span.end not in ends:
            violations.append(
                Violation(
                    "scene-not-whole-sentences",
                    f"{ann.category.value} spans must cover whole sentences",
                )
            )
    return violations


def _check_span(span: Span, doc: SummaryDocument, label: str, out: list[Violation]) -> bool:
    if span.end > len(doc.text):
        out.append(
            Violation(f"{label}-out-of-bounds", f"{label} extends past end of text")
        )
        return False
    if span.segment_index >= doc.segment_count:
        out.append(
            Violation(
                f"{label}-unknown-segment",
                f"{label} references segment {span.segment_index} "
                f"but document has {doc.segment_count}",
            )
        )
        return False
    seg_start, seg_end = doc.segment_char_range(span.segment_index)
    if span.start < seg_start or span.end > seg_end:
        out.append(
            Violation(
                f"{label}-outside-segment",
                f"{label} [{span.start}, {span.end}) lies outside "
                f"segment {span.segment_index} [{seg_start}, {seg_end})",
            )
        )
        return False
    return True


def validate_set(
    s: AnnotationSet, doc: SummaryDocument
) -> list[tuple[int, ErrorAnnotation, Violation]]:
    """Validate every annotation in a set; returns (index, annotation, violation) rows."""
    if s.doc_id != doc.doc_id:
        raise ValueError(f"set is for {s.doc_id!r}, document is {doc.doc_id!r}")
    rows: list[tuple[int, ErrorAnnotation, Violation]] = []
    for i, ann in enumerate(s.annotations):
        for violation in validate_annotation(ann, doc):
            rows.append((i, ann, violation))
    return rows


# -- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class AggregatedAnnotation:
    """A union record: one (category, span) with the annotators who marked it."""

    span: Span
    category: ErrorCategory
    annotators: frozenset[str]
    antecedent: Span | None = None

    def __post_init__(self) -> None:
        if not self.annotators:
            raise ValueError("aggregated annotation needs at least one annotator")

    @property
    def support(self) -> int:
        return len(self.annotators)


@dataclass(frozen=True)
class AggregatedSet:
    """Annotator-union view of one summary's annotations."""

    doc_id: str
    annotations: tuple[AggregatedAnnotation, ...]
    annotator_ids: frozenset[str]

    def __post_init__(self) -> None:
        for ann in self.annotations:
            if not ann.annotators <= self.annotator_ids:
                raise ValueError("aggregated record names an annotator outside the set")


AnyAnnotationSet = Union[AnnotationSet, AggregatedSet]


def trim_span(span: Span, text: str) -> Span:
    """Shrink a span so it starts and ends on non-whitespace."""
    start, end = span.start, span.end
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        return span  # all-whitespace span; leave untouched rather than collapse
    if (start, end) == (span.start, span.end):
        return span
    return Span(start, end, span.segment_index)


def aggregate_annotators(
    sets: Sequence[AnyAnnotationSet], doc: SummaryDocument
) -> AggregatedSet:
    """Union the annotations of several annotators for one summary.

    Records identical in (category, span) collapse into one with support v =
    number of distinct annotators; spans are compared and stored after
    trimming edge whitespace. Differing spans stay distinct — overlap-aware
    merging is the agreement module's job, not aggregation's. Aggregating an
    already aggregated set is the identity, and input order never matters.
    """
    if not sets:
        raise ValueError("nothing to aggregate")
    doc_ids = {s.doc_id for s in sets}
    if doc_ids != {doc.doc_id}:
        raise ValueError(f"mixed or mismatched doc_ids: {sorted(doc_ids)}")

    merged: dict[tuple, dict] = {}
    all_ids: set[str] = set()
    for s in sets:
        all_ids |= s.annotator_ids
        for ann in s.annotations:
            span = trim_span(ann.span, doc.text)
            key = (ann.category, span.segment_index, span.start, span.end)
            if isinstance(ann, AggregatedAnnotation):
                contributors = ann.annotators
                ante_rank = min(ann.annotators)
            else:
                contributors = frozenset({ann.annotator_id})
                ante_rank = ann.annotator_id
            rec = merged.setdefault(
                key, {"span": span, "annotators": set(), "antecedent": (None, None)}
            )
            rec["annotators"] |= contributors
            # Antecedents may differ between annotators marking the same span;
            # keep the one from the lexicographically smallest annotator id.
            best_rank, _ = rec["antecedent"]
            if ann.antecedent is not None and (best_rank is None or ante_rank < best_rank):
                rec["antecedent"] = (ante_rank, ann.antecedent)

    records = [
        AggregatedAnnotation(
            span=rec["span"],
            category=key[0],
            annotators=frozenset(rec["annotators"]),
            antecedent=rec["antecedent"][1],
        )
        for key, rec in merged.items()
    ]
    records.sort(
        key=lambda a: (
            a.span.segment_index,
            a.span.start,
            a.span.end,
            _CATEGORY_ORDER[a.category],
        )
    )
    return AggregatedSet(doc.doc_id, tuple(records), frozenset(all_ids))


def iter_span_records(s: AnyAnnotationSet) -> Iterable[tuple[Span, ErrorCategory]]:
    """Uniform (span, category) view over raw and aggregated sets."""
    for ann in s.annotations:
        yield ann.span, ann.category


def replace_annotation_span(ann: ErrorAnnotation, span: Span) -> ErrorAnnotation:
    return dataclasses.replace(ann, span=span)
