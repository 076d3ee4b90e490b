"""Flat-file persistence for the annotation service.

Layout under the data directory:

    summaries/<doc_id>.json      segmented summary files
    annotators.json              roster: list of annotator ids
    tasks.json                   task assignments (auto-created from roster x docs)
    annotations/<doc>__<annotator>.json
    revisions/<doc>__<annotator>.log
    reference/<doc_id>.json      expert annotations for training mode

Writes go through write-temp-then-rename, so a crashed write never leaves a
partial file. Mutations are serialized per (doc, annotator) key.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from .annotations import AnnotationSet, ErrorAnnotation
from .documents import SummaryDocument
from .errors import SchemaError
from .serialization import (
    SCHEMA_VERSION,
    annotation_set_from_dict,
    annotation_set_to_dict,
    load_summary,
)

TaskStatus = Literal["pending", "in_progress", "submitted"]


@dataclass(frozen=True)
class TaskAssignment:
    task_id: str
    doc_id: str
    annotator_id: str
    status: TaskStatus
    current_segment: int

    def __post_init__(self) -> None:
        if self.status not in ("pending", "in_progress", "submitted"):
            raise ValueError(f"unknown task status: {self.status!r}")
        if self.current_segment < 0:
            raise ValueError("current_segment must be >= 0")

    def check_against(self, doc: SummaryDocument) -> None:
        if self.current_segment > doc.segment_count:
            raise ValueError(
                f"task {self.task_id}: current_segment {self.current_segment} "
                f"exceeds segment count {doc.segment_count}"
            )
        if self.status == "submitted" and self.current_segment != doc.segment_count:
            raise ValueError(
                f"task {self.task_id}: submitted but current_segment is not final"
            )


def _atomic_write(path: Path, payload: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class AnnotationStore:
    """Documents, tasks, and per-annotator annotation files on disk."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        summaries = sorted((self.root / "summaries").glob("*.json"))
        if not summaries:
            raise FileNotFoundError(
                f"no summary files under {self.root / 'summaries'}"
            )
        self.documents: dict[str, SummaryDocument] = {}
        for path in summaries:
            doc = load_summary(path)
            if not doc.is_segmented:
                raise SchemaError(
                    "summary must be segmented before serving", path=str(path)
                )
            self.documents[doc.doc_id] = doc

        roster_path = self.root / "annotators.json"
        if not roster_path.exists():
            raise FileNotFoundError(f"annotator roster not found: {roster_path}")
        self.annotators: list[str] = sorted(
            set(json.loads(roster_path.read_text(encoding="utf-8")))
        )
        if not self.annotators:
            raise ValueError("annotator roster is empty")

        self._tasks_lock = threading.Lock()
        self._key_locks: dict[tuple[str, str], threading.Lock] = defaultdict(
            threading.Lock
        )
        self._tasks: dict[tuple[str, str], TaskAssignment] = {}
        self._load_or_create_tasks()

    # -- tasks -------------------------------------------------------------------

    @property
    def _tasks_path(self) -> Path:
        return self.root / "tasks.json"

    def _load_or_create_tasks(self) -> None:
        if self._tasks_path.exists():
            data = json.loads(self._tasks_path.read_text(encoding="utf-8"))
            for row in data["tasks"]:
                task = TaskAssignment(
                    task_id=row["task_id"],
                    doc_id=row["doc_id"],
                    annotator_id=row["annotator_id"],
                    status=row["status"],
                    current_segment=int(row["current_segment"]),
                )
                if task.doc_id in self.documents:
                    task.check_against(self.documents[task.doc_id])
                    self._tasks[(task.doc_id, task.annotator_id)] = task
        changed = False
        for doc_id in sorted(self.documents):
            for annotator in self.annotators:
                if (doc_id, annotator) not in self._tasks:
                    self._tasks[(doc_id, annotator)] = TaskAssignment(
                        task_id=f"{doc_id}__{annotator}",
                        doc_id=doc_id,
                        annotator_id=annotator,
                        status="pending",
                        current_segment=0,
                    )
                    changed = True
        if changed or not self._tasks_path.exists():
            self._save_tasks()

    def _save_tasks(self) -> None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "tasks": [
                dataclasses.asdict(task)
                for _, task in sorted(self._tasks.items())
            ],
        }
        _atomic_write(self._tasks_path, json.dumps(payload, indent=2) + "\n")

    def tasks_for(self, annotator_id: str) -> list[TaskAssignment]:
        with self._tasks_lock:
            return [
                task
                for (_, a), task in sorted(self._tasks.items())
                if a == annotator_id
            ]

    def get_task(self, doc_id: str, annotator_id: str) -> TaskAssignment | None:
        with self._tasks_lock:
            return self._tasks.get((doc_id, annotator_id))

    def _update_task(self, task: TaskAssignment) -> None:
        with self._tasks_lock:
            self._tasks[(task.doc_id, task.annotator_id)] = task
            self._save_tasks()

    # -- annotations -------------------------------------------------------------

    def _annotation_path(self, doc_id: str, annotator_id: str) -> Path:
        return self.root / "annotations" / f"{doc_id}__{annotator_id}.json"

    def _revision_log_path(self, doc_id: str, annotator_id: str) -> Path:
        return self.root / "revisions" / f"{doc_id}__{annotator_id}.log"

    def load_annotations(self, doc_id: str, annotator_id: str) -> dict | None:
        path = self._annotation_path(doc_id, annotator_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def load_reference(self, doc_id: str) -> dict | None:
        path = self.root / "reference" / f"{doc_id}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def submit_segment(
        self,
        doc_id: str,
        annotator_id: str,
        segment_index: int,
        annotations: list[ErrorAnnotation],
        likert: int | None = None,
    ) -> tuple[int, TaskAssignment]:
        """Replace one segment's annotations and advance the task if due.

        Returns (revision, updated task). Concurrent submissions for the same
        (doc, annotator) are serialized; last write wins with a monotonically
        increasing revision number.
        """
        doc = self.documents[doc_id]
        with self._key_locks[(doc_id, annotator_id)]:
            existing = self.load_annotations(doc_id, annotator_id)
            revision = (existing.get("revision", 0) if existing else 0) + 1
            kept: list[ErrorAnnotation] = []
            old_likert: dict[str, int] = {}
            if existing:
                parsed = annotation_set_from_dict(existing)
                kept = [
                    a
                    for a in parsed.annotations
                    if a.span.segment_index != segment_index
                ]
                old_likert = dict(parsed.likert)
            merged = sorted(
                kept + list(annotations),
                key=lambda a: (a.span.segment_index, a.span.start, a.span.end),
            )
            if likert is not None:
                old_likert[annotator_id] = likert
            updated = AnnotationSet.build(
                doc_id,
                merged,
                annotator_ids={annotator_id},
                likert=old_likert,
            )
            payload = annotation_set_to_dict(updated)
            payload["revision"] = revision
            _atomic_write(
                self._annotation_path(doc_id, annotator_id),
                json.dumps(payload, ensure_ascii=False, indent=2) + "\n",
            )
            log_path = self._revision_log_path(doc_id, annotator_id)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(log_path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "revision": revision,
                            "segment_index": segment_index,
                            "n_annotations": len(annotations),
                            "timestamp": time.time(),
                        }
                    )
                    + "\n"
                )

            task = self.get_task(doc_id, annotator_id)
            assert task is not None
            if segment_index == task.current_segment:
                new_segment = task.current_segment + 1
                status: TaskStatus = (
                    "submitted" if new_segment == doc.segment_count else "in_progress"
                )
                task = dataclasses.replace(
                    task, current_segment=new_segment, status=status
                )
            elif task.status == "pending":
                task = dataclasses.replace(task, status="in_progress")
            self._update_task(task)
            return revision, task
