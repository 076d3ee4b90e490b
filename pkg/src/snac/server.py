"""HTTP service backing the annotation interface.

Thin layer over :mod:`snac.storage`: every posted annotation runs through
validate_annotation server-side, so no rule exists only in a client, and
segments are revealed strictly in order.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .annotations import ErrorAnnotation, validate_annotation
from .documents import Span, SummaryDocument
from .serialization import SCHEMA_VERSION
from .storage import AnnotationStore, TaskAssignment
from .taxonomy import ErrorCategory


class SpanPayload(BaseModel):
    segment: int
    start: int
    end: int


class AnnotationPayload(BaseModel):
    category: str
    segment: int
    start: int
    end: int
    antecedent: SpanPayload | None = None


class SubmitPayload(BaseModel):
    doc_id: str
    annotator_id: str
    segment_index: int = Field(ge=0)
    annotations: list[AnnotationPayload]
    likert: int | None = Field(default=None, ge=1, le=5)


def _error(status: int, message: str, **extra: Any) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def _task_view(task: TaskAssignment, doc: SummaryDocument) -> dict:
    return {
        "task_id": task.task_id,
        "doc_id": task.doc_id,
        "annotator_id": task.annotator_id,
        "status": task.status,
        "current_segment": task.current_segment,
        "segment_count": doc.segment_count,
    }


def _summary_view(doc: SummaryDocument, task: TaskAssignment) -> dict:
    """Doc payload truncated to the segments the annotator may see."""
    visible_segments = min(task.current_segment + 1, doc.segment_count)
    boundaries = doc.segment_boundaries[:visible_segments]
    visible_sentences = boundaries[-1] if boundaries else 0
    text_end = doc.sentences[visible_sentences - 1].end if visible_sentences else 0
    return {
        "schema_version": SCHEMA_VERSION,
        "doc_id": doc.doc_id,
        "system_id": doc.system_id,
        "text": doc.text[:text_end],
        "sentences": [
            {"start": s.start, "end": s.end} for s in doc.sentences[:visible_sentences]
        ],
        "segments": list(boundaries),
        "tokens": [
            [{"start": a, "end": b} for a, b in doc.sentence_tokens(i)]
            for i in range(visible_sentences)
        ],
        "current_segment": task.current_segment,
        "segment_count": doc.segment_count,
        "status": task.status,
    }


def create_app(data_dir: str | Path, *, ui_dir: str | Path | None = None) -> FastAPI:
    store = AnnotationStore(data_dir)
    app = FastAPI(title="snac annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/api/categories")
    def categories() -> list[dict]:
        return [
            {
                "name": c.value,
                "group": c.group.value,
                "display_name": c.display_name,
                "requires_antecedent": c.requires_antecedent,
                "whole_sentence": c.whole_sentence,
            }
            for c in ErrorCategory
        ]

    @app.get("/api/tasks")
    def tasks(annotator: str = Query(...)):
        if annotator not in store.annotators:
            return _error(403, f"unknown annotator: {annotator}")
        return {
            "tasks": [
                _task_view(t, store.documents[t.doc_id])
                for t in store.tasks_for(annotator)
            ]
        }

    @app.get("/api/summary/{doc_id}")
    def summary(doc_id: str, annotator: str = Query(...)):
        doc = store.documents.get(doc_id)
        if doc is None:
            return _error(404, f"unknown document: {doc_id}")
        if annotator not in store.annotators:
            return _error(403, f"unknown annotator: {annotator}")
        task = store.get_task(doc_id, annotator)
        if task is None:
            return _error(404, f"no task for {annotator} on {doc_id}")
        return _summary_view(doc, task)

    @app.post("/api/annotations", status_code=201)
    def submit(payload: SubmitPayload):
        doc = store.documents.get(payload.doc_id)
        if doc is None:
            return _error(404, f"unknown document: {payload.doc_id}")
        if payload.annotator_id not in store.annotators:
            return _error(403, f"unknown annotator: {payload.annotator_id}")
        task = store.get_task(payload.doc_id, payload.annotator_id)
        if task is None:
            return _error(404, "no such task")
        if task.status == "submitted":
            return _error(409, "task already submitted")
        if payload.segment_index >= doc.segment_count:
            return _error(422, "segment index out of range", violations=[])
        if payload.segment_index > task.current_segment:
            return _error(
                422,
                "segment not yet revealed",
                violations=[
                    {
                        "index": None,
                        "code": "segment-not-revealed",
                        "message": f"segment {payload.segment_index} is beyond "
                        f"the current segment {task.current_segment}",
                    }
                ],
            )

        annotations: list[ErrorAnnotation] = []
        violations: list[dict] = []
        for i, row in enumerate(payload.annotations):
            try:
                category = ErrorCategory(row.category)
            except ValueError:
                violations.append(
                    {
                        "index": i,
                        "code": "unknown-category",
                        "message": f"unknown error category: {row.category!r}",
                    }
                )
                continue
            try:
                span = Span(row.start, row.end, row.segment)
                antecedent = (
                    Span(row.antecedent.start, row.antecedent.end, row.antecedent.segment)
                    if row.antecedent is not None
                    else None
                )
            except ValueError as exc:
                violations.append(
                    {"index": i, "code": "malformed-span", "message": str(exc)}
                )
                continue
            if span.segment_index != payload.segment_index:
                violations.append(
                    {
                        "index": i,
                        "code": "segment-mismatch",
                        "message": f"annotation targets segment {span.segment_index}, "
                        f"submission is for segment {payload.segment_index}",
                    }
                )
                continue
            annotation = ErrorAnnotation(
                span=span,
                category=category,
                annotator_id=payload.annotator_id,
                antecedent=antecedent,
            )
            for violation in validate_annotation(annotation, doc):
                violations.append(
                    {"index": i, "code": violation.code, "message": violation.message}
                )
            annotations.append(annotation)
        if violations:
            return _error(422, "annotation validation failed", violations=violations)

        revision, task = store.submit_segment(
            payload.doc_id,
            payload.annotator_id,
            payload.segment_index,
            annotations,
            payload.likert,
        )
        return {
            "revision": revision,
            "current_segment": task.current_segment,
            "status": task.status,
        }

    @app.get("/api/annotations/{doc_id}/{annotator}")
    def annotations(doc_id: str, annotator: str):
        data = store.load_annotations(doc_id, annotator)
        if data is None:
            return _error(404, f"no annotations for {annotator} on {doc_id}")
        return data

    @app.get("/api/reference/{doc_id}")
    def reference(doc_id: str):
        data = store.load_reference(doc_id)
        if data is None:
            return _error(404, f"no reference annotations for {doc_id}")
        return data

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
