import json

import pytest
from fastapi.testclient import TestClient

from snac.server import create_app
from snac.serialization import annotation_set_from_dict

from .conftest import CHAR, INCON, ann, make_doc, set_of, span_for, write_corpus


@pytest.fixture
def data_dir(tmp_path):
    doc = make_doc(
        [
            "Gabriel Oak farms the land.",
            "Bathsheba arrives at the farm.",
            "They argue about the sheep.",
            "Gabriel leaves the village.",
        ],
        doc_id="doc-1",
        k=2,
    )  # segments: [0,1], [2,3]
    write_corpus(tmp_path, [doc], [])
    (tmp_path / "annotators.json").write_text(json.dumps(["w1", "w2"]))
    reference = set_of(doc, [ann(doc, 0, CHAR, "expert", rel_end=11)])
    from snac.serialization import annotation_set_to_dict

    ref_dir = tmp_path / "reference"
    ref_dir.mkdir()
    (ref_dir / "doc-1.json").write_text(json.dumps(annotation_set_to_dict(reference)))
    return tmp_path


@pytest.fixture
def client(data_dir):
    return TestClient(create_app(data_dir))


def span_payload(doc, sentence_index, category, rel_end=None, antecedent=None):
    span = span_for(doc, sentence_index, rel_end=rel_end)
    row = {
        "category": category.value,
        "segment": span.segment_index,
        "start": span.start,
        "end": span.end,
    }
    if antecedent is not None:
        row["antecedent"] = antecedent
    return row


@pytest.fixture
def doc():
    return make_doc(
        [
            "Gabriel Oak farms the land.",
            "Bathsheba arrives at the farm.",
            "They argue about the sheep.",
            "Gabriel leaves the village.",
        ],
        doc_id="doc-1",
        k=2,
    )


class TestTaskAndSummaryEndpoints:
    def test_categories_lists_all_seven(self, client):
        rows = client.get("/api/categories").json()
        assert {r["name"] for r in rows} == {
            "CharE", "RefE", "SceneE", "InconE", "RepE", "GramE", "CorefE",
        }
        by_name = {r["name"]: r for r in rows}
        assert by_name["CorefE"]["group"] == "language"
        assert by_name["InconE"]["requires_antecedent"]
        assert by_name["SceneE"]["whole_sentence"]

    def test_tasks_for_annotator(self, client):
        body = client.get("/api/tasks", params={"annotator": "w1"}).json()
        assert len(body["tasks"]) == 1
        task = body["tasks"][0]
        assert task["doc_id"] == "doc-1"
        assert task["status"] == "pending"
        assert task["current_segment"] == 0

    def test_unknown_annotator_403(self, client):
        assert client.get("/api/tasks", params={"annotator": "nope"}).status_code == 403

    def test_summary_reveals_only_first_segment(self, client, doc):
        body = client.get("/api/summary/doc-1", params={"annotator": "w1"}).json()
        assert body["segments"] == [2]
        assert len(body["sentences"]) == 2
        assert body["text"].endswith("arrives at the farm.")
        assert "argue" not in body["text"]
        assert len(body["tokens"]) == 2

    def test_unknown_doc_404(self, client):
        assert (
            client.get("/api/summary/ghost", params={"annotator": "w1"}).status_code
            == 404
        )


class TestSubmission:
    def test_valid_chare_round_trips(self, client, doc):
        payload = {
            "doc_id": "doc-1",
            "annotator_id": "w1",
            "segment_index": 0,
            "annotations": [span_payload(doc, 0, CHAR, rel_end=11)],
        }
        response = client.post("/api/annotations", json=payload)
        assert response.status_code == 201
        body = response.json()
        assert body["revision"] == 1
        assert body["current_segment"] == 1
        stored = client.get("/api/annotations/doc-1/w1").json()
        parsed = annotation_set_from_dict(stored)
        assert len(parsed.annotations) == 1
        assert parsed.annotations[0].category is CHAR
        assert parsed.annotations[0].span == span_for(doc, 0, rel_end=11)

    def test_incone_without_antecedent_422(self, client, doc):
        payload = {
            "doc_id": "doc-1",
            "annotator_id": "w1",
            "segment_index": 0,
            "annotations": [span_payload(doc, 1, INCON)],
        }
        response = client.post("/api/annotations", json=payload)
        assert response.status_code == 422
        codes = [v["code"] for v in response.json()["violations"]]
        assert "antecedent-required" in codes

    def test_future_segment_not_revealed(self, client, doc):
        payload = {
            "doc_id": "doc-1",
            "annotator_id": "w1",
            "segment_index": 1,
            "annotations": [],
        }
        response = client.post("/api/annotations", json=payload)
        assert response.status_code == 422
        assert response.json()["violations"][0]["code"] == "segment-not-revealed"

    def test_sequential_reveal_and_submission(self, client, doc):
        for segment in (0, 1):
            response = client.post(
                "/api/annotations",
                json={
                    "doc_id": "doc-1",
                    "annotator_id": "w1",
                    "segment_index": segment,
                    "annotations": [],
                },
            )
            assert response.status_code == 201
        body = response.json()
        assert body["status"] == "submitted"
        assert body["current_segment"] == 2
        # Further submissions conflict.
        response = client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 1,
                "annotations": [],
            },
        )
        assert response.status_code == 409

    def test_revision_of_earlier_segment_allowed(self, client, doc):
        client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 0,
                "annotations": [],
            },
        )
        response = client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 0,
                "annotations": [span_payload(doc, 0, CHAR, rel_end=11)],
            },
        )
        assert response.status_code == 201
        body = response.json()
        assert body["revision"] == 2
        assert body["current_segment"] == 1  # revising does not advance

    def test_segment_mismatch_rejected(self, client, doc):
        payload = {
            "doc_id": "doc-1",
            "annotator_id": "w1",
            "segment_index": 0,
            "annotations": [span_payload(doc, 2, CHAR, rel_end=4)],
        }
        response = client.post("/api/annotations", json=payload)
        assert response.status_code == 422
        codes = [v["code"] for v in response.json()["violations"]]
        assert "segment-mismatch" in codes

    def test_unknown_doc_404_and_annotator_403(self, client, doc):
        base = {
            "annotator_id": "w1",
            "segment_index": 0,
            "annotations": [],
        }
        assert (
            client.post("/api/annotations", json={**base, "doc_id": "ghost"}).status_code
            == 404
        )
        assert (
            client.post(
                "/api/annotations",
                json={**base, "doc_id": "doc-1", "annotator_id": "ghost"},
            ).status_code
            == 403
        )

    def test_likert_persisted(self, client, doc):
        client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w2",
                "segment_index": 0,
                "annotations": [],
                "likert": 4,
            },
        )
        stored = client.get("/api/annotations/doc-1/w2").json()
        assert stored["likert"] == 4

    def test_annotations_404_before_any_submission(self, client):
        assert client.get("/api/annotations/doc-1/w1").status_code == 404

    def test_reference_endpoint(self, client):
        body = client.get("/api/reference/doc-1").json()
        assert body["annotator_id"] == "expert"
        assert client.get("/api/reference/ghost").status_code == 404


class TestStorePersistence:
    def test_tasks_survive_restart(self, data_dir, doc):
        client = TestClient(create_app(data_dir))
        client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 0,
                "annotations": [],
            },
        )
        fresh = TestClient(create_app(data_dir))
        body = fresh.get("/api/tasks", params={"annotator": "w1"}).json()
        assert body["tasks"][0]["current_segment"] == 1
        assert body["tasks"][0]["status"] == "in_progress"

    def test_revision_log_appended(self, data_dir):
        client = TestClient(create_app(data_dir))
        for _ in range(2):
            client.post(
                "/api/annotations",
                json={
                    "doc_id": "doc-1",
                    "annotator_id": "w1",
                    "segment_index": 0,
                    "annotations": [],
                },
            )
        log = (data_dir / "revisions" / "doc-1__w1.log").read_text().splitlines()
        assert [json.loads(line)["revision"] for line in log] == [1, 2]

    def test_no_temp_files_left(self, data_dir):
        client = TestClient(create_app(data_dir))
        client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 0,
                "annotations": [],
            },
        )
        leftovers = list(data_dir.rglob(".tmp-*"))
        assert leftovers == []

    def test_concurrent_submissions_serialized(self, data_dir):
        from concurrent.futures import ThreadPoolExecutor

        client = TestClient(create_app(data_dir))
        client.post(
            "/api/annotations",
            json={
                "doc_id": "doc-1",
                "annotator_id": "w1",
                "segment_index": 0,
                "annotations": [],
            },
        )

        def revise(_):
            return client.post(
                "/api/annotations",
                json={
                    "doc_id": "doc-1",
                    "annotator_id": "w1",
                    "segment_index": 0,
                    "annotations": [],
                },
            ).json()["revision"]

        with ThreadPoolExecutor(max_workers=8) as pool:
            revisions = sorted(pool.map(revise, range(8)))
        # Monotonically increasing, no duplicates or gaps: last write wins.
        assert revisions == list(range(2, 10))
        stored = client.get("/api/annotations/doc-1/w1").json()
        assert stored["revision"] == 9
