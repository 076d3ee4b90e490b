"""Versioned JSON file formats for summaries and annotation sets.

Summary file:
    {"schema_version": "1", "doc_id", "system_id", "text",
     "sentences": [{"start", "end"}], "paragraph_breaks": [int], "segments": [int]}

Annotation file (one annotator per file):
    {"schema_version": "1", "doc_id", "annotator_id", "likert"?, "revision"?,
     "annotations": [{"category", "segment", "start", "end",
                      "antecedent"?: {"segment", "start", "end"}}]}

Offsets are character offsets into the summary's full text.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .annotations import (
    AggregatedAnnotation,
    AggregatedSet,
    AnnotationSet,
    ErrorAnnotation,
)
from .documents import Sentence, Span, SummaryDocument
from .errors import SchemaError
from .taxonomy import ErrorCategory

SCHEMA_VERSION = "1"


def _require(data: Mapping[str, Any], key: str, path: str | None) -> Any:
    if key not in data:
        raise SchemaError(f"missing required field {key!r}", path=path)
    return data[key]


def _check_version(data: Mapping[str, Any], path: str | None) -> None:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION!r})",
            path=path,
        )


# -- summaries -----------------------------------------------------------------


def summary_to_dict(doc: SummaryDocument) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "system_id": doc.system_id,
        "text": doc.text,
        "sentences": [{"start": s.start, "end": s.end} for s in doc.sentences],
        "paragraph_breaks": list(doc.paragraph_breaks),
        "segments": list(doc.segment_boundaries),
    }


def summary_from_dict(data: Mapping[str, Any], *, path: str | None = None) -> SummaryDocument:
    _check_version(data, path)
    try:
        sentences = tuple(
            Sentence(int(s["start"]), int(s["end"]))
            for s in _require(data, "sentences", path)
        )
        return SummaryDocument(
            doc_id=str(_require(data, "doc_id", path)),
            system_id=str(data.get("system_id", "unknown")),
            text=str(_require(data, "text", path)),
            sentences=sentences,
            paragraph_breaks=tuple(int(b) for b in data.get("paragraph_breaks", [])),
            segment_boundaries=tuple(int(b) for b in data.get("segments", [])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed summary: {exc}", path=path) from exc


def load_summary(path: str | Path) -> SummaryDocument:
    return summary_from_dict(_load_json(path), path=str(path))


def save_summary(doc: SummaryDocument, path: str | Path) -> None:
    _dump_json(summary_to_dict(doc), path)


# -- annotation sets -----------------------------------------------------------


def _span_to_dict(span: Span) -> dict[str, int]:
    return {"segment": span.segment_index, "start": span.start, "end": span.end}


def _span_from_dict(data: Mapping[str, Any], path: str | None) -> Span:
    return Span(
        start=int(_require(data, "start", path)),
        end=int(_require(data, "end", path)),
        segment_index=int(_require(data, "segment", path)),
    )


def annotation_set_to_dict(s: AnnotationSet) -> dict[str, Any]:
    """Serialize a single-annotator set to the annotation file schema."""
    if len(s.annotator_ids) != 1:
        raise ValueError(
            "annotation files hold one annotator each; "
            f"set has {sorted(s.annotator_ids)}"
        )
    (annotator_id,) = s.annotator_ids
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "doc_id": s.doc_id,
        "annotator_id": annotator_id,
    }
    if annotator_id in s.likert:
        out["likert"] = s.likert[annotator_id]
    anns = []
    for ann in s.annotations:
        row: dict[str, Any] = {"category": ann.category.value, **_span_to_dict(ann.span)}
        if ann.antecedent is not None:
            row["antecedent"] = _span_to_dict(ann.antecedent)
        anns.append(row)
    out["annotations"] = anns
    return out


def annotation_set_from_dict(
    data: Mapping[str, Any], *, path: str | None = None
) -> AnnotationSet:
    _check_version(data, path)
    doc_id = str(_require(data, "doc_id", path))
    annotator_id = str(_require(data, "annotator_id", path))
    try:
        annotations = []
        for row in data.get("annotations", []):
            category = ErrorCategory(_require(row, "category", path))
            antecedent = None
            if row.get("antecedent") is not None:
                antecedent = _span_from_dict(row["antecedent"], path)
            annotations.append(
                ErrorAnnotation(
                    span=_span_from_dict(row, path),
                    category=category,
                    annotator_id=annotator_id,
                    antecedent=antecedent,
                )
            )
    except ValueError as exc:
        raise SchemaError(f"malformed annotation: {exc}", path=path) from exc
    likert = {}
    if data.get("likert") is not None:
        likert[annotator_id] = int(data["likert"])
    return AnnotationSet.build(
        doc_id, annotations, annotator_ids={annotator_id}, likert=likert
    )


def load_annotation_set(path: str | Path) -> AnnotationSet:
    return annotation_set_from_dict(_load_json(path), path=str(path))


def save_annotation_set(s: AnnotationSet, path: str | Path) -> None:
    _dump_json(annotation_set_to_dict(s), path)


# -- aggregated sets -----------------------------------------------------------


def aggregated_set_to_dict(s: AggregatedSet) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": s.doc_id,
        "annotators": sorted(s.annotator_ids),
        "annotations": [
            {
                "category": ann.category.value,
                **_span_to_dict(ann.span),
                **(
                    {"antecedent": _span_to_dict(ann.antecedent)}
                    if ann.antecedent is not None
                    else {}
                ),
                "by": sorted(ann.annotators),
                "support": ann.support,
            }
            for ann in s.annotations
        ],
    }


def aggregated_set_from_dict(
    data: Mapping[str, Any], *, path: str | None = None
) -> AggregatedSet:
    _check_version(data, path)
    doc_id = str(_require(data, "doc_id", path))
    try:
        annotations = tuple(
            AggregatedAnnotation(
                span=_span_from_dict(row, path),
                category=ErrorCategory(_require(row, "category", path)),
                annotators=frozenset(_require(row, "by", path)),
                antecedent=_span_from_dict(row["antecedent"], path)
                if row.get("antecedent") is not None
                else None,
            )
            for row in data.get("annotations", [])
        )
    except ValueError as exc:
        raise SchemaError(f"malformed aggregated annotation: {exc}", path=path) from exc
    return AggregatedSet(doc_id, annotations, frozenset(_require(data, "annotators", path)))


# -- shared helpers ------------------------------------------------------------


def _load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc


def _dump_json(data: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def dumps_report(data: Any) -> str:
    """Stable serialization for reports: sorted keys, trailing newline."""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
