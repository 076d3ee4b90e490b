"""Project span-level annotations to binary has-error labels per sentence or segment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from .annotations import AnyAnnotationSet, iter_span_records
from .documents import SummaryDocument
from .taxonomy import CategoryGroup, ErrorCategory

Level = Literal["sentence", "segment"]
Scope = Literal["coherence", "language", "all"]

_LEVELS = ("sentence", "segment")
_SCOPES = ("coherence", "language", "all")


@dataclass(frozen=True)
class ProjectedLabels:
    """Binary has-error flags, one per sentence or per segment.

    ``labels[i]`` is true iff at least one annotation whose category group
    matches ``scope`` has a span intersecting unit i. Internally the polarity
    is always has_error; the y in {0, 1} file convention (0 = erroneous) is
    applied only at I/O boundaries.
    """

    doc_id: str
    level: Level
    scope: Scope
    labels: tuple[bool, ...]

    @property
    def error_count(self) -> int:
        return sum(self.labels)

    def to_y(self) -> list[int]:
        """File-format view: y = 0 for erroneous units, 1 for clean ones."""
        return [0 if flag else 1 for flag in self.labels]


def scope_matches(category: ErrorCategory, scope: Scope) -> bool:
    if scope == "all":
        return True
    return category.group is CategoryGroup(scope)


def project_labels(
    annotations: AnyAnnotationSet,
    doc: SummaryDocument,
    level: Level,
    scope: Scope,
) -> ProjectedLabels:
    """Flag each sentence (or segment) intersected by a matching error span."""
    if level not in _LEVELS:
        raise ValueError(f"level must be one of {_LEVELS}, got {level!r}")
    if scope not in _SCOPES:
        raise ValueError(f"scope must be one of {_SCOPES}, got {scope!r}")
    if annotations.doc_id != doc.doc_id:
        raise ValueError(
            f"annotations are for {annotations.doc_id!r}, document is {doc.doc_id!r}"
        )
    if level == "sentence":
        ranges = [(s.start, s.end) for s in doc.sentences]
    else:
        ranges = [doc.segment_char_range(i) for i in range(doc.segment_count)]

    labels = [False] * len(ranges)
    for span, category in iter_span_records(annotations):
        if not scope_matches(category, scope):
            continue
        for i, (lo, hi) in enumerate(ranges):
            if labels[i]:
                continue
            if span.overlaps(lo, hi):
                labels[i] = True
    return ProjectedLabels(doc.doc_id, level, scope, tuple(labels))
