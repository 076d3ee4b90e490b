import pytest

from snac.annotations import AnnotationSet, ErrorAnnotation


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    print(f"\n[acceptance] {outcome}: {name}", flush=True)
from snac.documents import Span, document_from_sentences, segment_summary
from snac.taxonomy import ErrorCategory


def make_doc(sentences, doc_id="doc-1", k=3, system_id="test-system"):
    doc = document_from_sentences(doc_id, list(sentences), system_id=system_id)
    return segment_summary(doc, "fixed_k", k=k)


@pytest.fixture
def nine_sentence_doc():
    return make_doc([f"Sentence number {i} talks about topic {i}." for i in range(9)])


@pytest.fixture
def small_doc():
    # Segment 0: sentences 0-2, segment 1: sentence 3.
    return make_doc(
        [
            "Gabriel Oak farms the land.",
            "Bathsheba arrives at the farm.",
            "They argue about the sheep.",
            "Gabriel leaves the village.",
        ],
        k=3,
    )


def span_for(doc, sentence_index, *, rel_start=0, rel_end=None):
    """Span covering part of one sentence, offsets relative to the sentence."""
    sent = doc.sentences[sentence_index]
    end = sent.end if rel_end is None else sent.start + rel_end
    return Span(
        sent.start + rel_start,
        end,
        doc.segment_of_sentence(sentence_index),
    )


def ann(doc, sentence_index, category, annotator, **kwargs):
    return ErrorAnnotation(
        span=span_for(doc, sentence_index, **kwargs),
        category=category,
        annotator_id=annotator,
    )


def set_of(doc, annotations, annotator_ids=None, likert=None):
    return AnnotationSet.build(
        doc.doc_id, annotations, annotator_ids=annotator_ids, likert=likert
    )


CHAR = ErrorCategory.CharE
REF = ErrorCategory.RefE
SCENE = ErrorCategory.SceneE
INCON = ErrorCategory.InconE
REP = ErrorCategory.RepE
GRAM = ErrorCategory.GramE
COREF = ErrorCategory.CorefE


def write_corpus(root, docs, sets):
    """Materialize summaries/ and annotations/ dirs for CLI and server tests."""
    import json

    from snac.serialization import annotation_set_to_dict, summary_to_dict

    summaries = root / "summaries"
    annotations = root / "annotations"
    summaries.mkdir(parents=True, exist_ok=True)
    annotations.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        (summaries / f"{doc.doc_id}.json").write_text(
            json.dumps(summary_to_dict(doc)), encoding="utf-8"
        )
    for s in sets:
        (annotator_id,) = s.annotator_ids
        (annotations / f"{s.doc_id}__{annotator_id}.json").write_text(
            json.dumps(annotation_set_to_dict(s)), encoding="utf-8"
        )
    return summaries, annotations
