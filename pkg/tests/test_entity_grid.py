import json
import math
import random

import pytest

from snac.entity_grid import (
    ABSENT,
    ROLES,
    EntityGrid,
    FileRoleProvider,
    HeuristicRoleProvider,
    TransitionModel,
    build_entity_grid,
    entity_grid_score,
    estimate_transitions,
    load_model,
    save_model,
    score_document,
)
from snac.errors import SchemaError

from .conftest import make_doc


def grid(doc_id, roles):
    return EntityGrid(doc_id, tuple(f"e{i}" for i in range(len(roles))), tuple(map(tuple, roles)))


class TestEstimateTransitions:
    def test_single_entity_ss(self):
        model = estimate_transitions([grid("d", [["S", "S"]])], smoothing=0)
        assert model.probability("S", "S") == 1.0

    def test_two_entities_half_half(self):
        model = estimate_transitions(
            [grid("d", [["S", "O"], ["S", "X"]])], smoothing=0
        )
        assert model.probability("S", "O") == pytest.approx(0.5)
        assert model.probability("S", "X") == pytest.approx(0.5)

    def test_rows_sum_to_one_any_smoothing(self):
        rng = random.Random(13)
        for _ in range(20):
            n_entities = rng.randint(1, 4)
            n_sentences = rng.randint(2, 6)
            roles = [
                [rng.choice(ROLES) for _ in range(n_sentences)]
                for _ in range(n_entities)
            ]
            roles = [
                row if any(c != ABSENT for c in row) else ["S"] + row[1:]
                for row in roles
            ]
            for smoothing in (0.1, 1.0, 10.0):
                model = estimate_transitions([grid("d", roles)], smoothing=smoothing)
                for r1 in ROLES:
                    total = sum(model.probability(r1, r2) for r2 in ROLES)
                    assert total == pytest.approx(1.0, abs=1e-9)

    def test_smoothed_probabilities_positive(self):
        model = estimate_transitions([grid("d", [["S", "S"]])], smoothing=1.0)
        for r1 in ROLES:
            for r2 in ROLES:
                assert model.probability(r1, r2) > 0

    def test_needs_a_two_sentence_grid(self):
        with pytest.raises(ValueError):
            estimate_transitions([grid("d", [["S"]])])

    def test_unseen_row_with_zero_smoothing(self):
        model = estimate_transitions([grid("d", [["S", "S"]])], smoothing=0)
        assert model.probability("O", "S") == 0.0


class TestEntityGridScore:
    def test_single_entity_half_probability(self):
        counts = {"S": {"S": 1, "O": 1, "X": 0, "-": 0}}
        model = TransitionModel(counts=counts, smoothing=0)
        score = entity_grid_score("Gabriel farms.", "Gabriel sells wool.", model)
        assert score.value == pytest.approx(math.log(0.5), abs=1e-12)
        assert not score.uninformative

    def test_no_entities_flagged_uninformative(self):
        model = estimate_transitions([grid("d", [["S", "S"]])], smoothing=1)
        score = entity_grid_score("nothing here.", "nothing there.", model)
        assert score.value == 0.0
        assert score.uninformative

    def test_additive_over_entities(self):
        counts = {
            "S": {"S": 3, "O": 1, "X": 0, "-": 0},
            "-": {"S": 1, "O": 0, "X": 0, "-": 3},
        }
        model = TransitionModel(counts=counts, smoothing=0)
        score = entity_grid_score(
            "Gabriel farms.", "Gabriel met Bathsheba.", model
        )
        p1 = model.probability("S", "S")  # gabriel: S -> S
        p2 = model.probability("-", "O")  # bathsheba: absent -> O... see below
        # bathsheba appears only in the second sentence, after the verb.
        expected = math.log(p1) + (math.log(p2) if p2 > 0 else -math.inf)
        assert score.value == expected

    def test_score_is_nonpositive(self):
        model = estimate_transitions(
            [grid("d", [["S", "O"], ["-", "S"]])], smoothing=1
        )
        score = entity_grid_score("Gabriel farms.", "Gabriel sees Troy.", model)
        assert score.value <= 0.0


class TestHeuristicRoles:
    def test_three_sentence_fixture_by_hand(self):
        # S: mention before the first verb; O: after it; X: no verb found.
        doc = make_doc(
            [
                "Gabriel farms the land.",        # Gabriel before "farms" -> S
                "Storms ruin Gabriel.",           # Gabriel after "ruin" -> O
                "Penniless, Gabriel wanders.",    # no recognized verb -> X
            ],
            doc_id="roles",
            k=3,
        )
        grid_ = build_entity_grid(doc, HeuristicRoleProvider())
        assert "gabriel" in grid_.entities
        row = grid_.roles[grid_.entities.index("gabriel")]
        assert row == ("S", "O", "X")

    def test_absent_where_unmentioned(self):
        doc = make_doc(
            ["Gabriel farms the land.", "Rain falls all night.", "Gabriel rests."],
            doc_id="roles2",
            k=3,
        )
        grid_ = build_entity_grid(doc)
        row = grid_.roles[grid_.entities.index("gabriel")]
        assert row[1] == ABSENT

    def test_role_precedence_subject_wins(self):
        doc = make_doc(["Gabriel farms while rain soaks Gabriel."], doc_id="prec", k=1)
        grid_ = build_entity_grid(doc)
        row = grid_.roles[grid_.entities.index("gabriel")]
        assert row == ("S",)


class TestFileRoleProvider:
    def test_round_trip_roles(self, tmp_path):
        doc = make_doc(["Alpha one.", "Beta two."], doc_id="fr", k=2)
        payload = {
            "doc_id": "fr",
            "sentences": [
                {"entities": [{"key": "alpha", "role": "S"}]},
                {"entities": [{"key": "alpha", "role": "O"}, {"key": "beta", "role": "S"}]},
            ],
        }
        path = tmp_path / "roles.json"
        path.write_text(json.dumps(payload))
        grid_ = build_entity_grid(doc, FileRoleProvider(path))
        assert grid_.entities == ("alpha", "beta")
        assert grid_.roles[0] == ("S", "O")
        assert grid_.roles[1] == (ABSENT, "S")

    def test_malformed_file_reports_path(self, tmp_path):
        path = tmp_path / "roles.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError) as excinfo:
            FileRoleProvider(path)
        assert "roles.json" in str(excinfo.value)

    def test_bad_role_rejected(self, tmp_path):
        path = tmp_path / "roles.json"
        path.write_text(
            json.dumps(
                {"doc_id": "d", "sentences": [{"entities": [{"key": "a", "role": "Z"}]}]}
            )
        )
        with pytest.raises(SchemaError):
            FileRoleProvider(path)

    def test_sentence_count_mismatch(self, tmp_path):
        doc = make_doc(["One.", "Two."], doc_id="m", k=2)
        path = tmp_path / "roles.json"
        path.write_text(json.dumps({"doc_id": "m", "sentences": [{"entities": []}]}))
        with pytest.raises(ValueError):
            build_entity_grid(doc, FileRoleProvider(path))


class TestModelPersistence:
    def test_save_load_round_trip(self, tmp_path):
        model = estimate_transitions(
            [grid("d", [["S", "O"], ["S", "X"]])], smoothing=0.5, corpus_id="fixture"
        )
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.smoothing == 0.5
        assert loaded.corpus_id == "fixture"
        for r1 in ROLES:
            for r2 in ROLES:
                assert loaded.probability(r1, r2) == pytest.approx(
                    model.probability(r1, r2)
                )

    def test_counts_allow_resmoothing(self, tmp_path):
        model = estimate_transitions([grid("d", [["S", "O"]])], smoothing=1.0)
        resmoothed = TransitionModel(counts=model.counts, smoothing=5.0)
        assert resmoothed.probability("S", "O") != model.probability("S", "O")

    def test_score_document_consecutive_pairs(self):
        doc = make_doc(
            ["Gabriel farms the land.", "Gabriel sells wool.", "Nothing happens here."],
            doc_id="sd",
            k=3,
        )
        model = estimate_transitions([build_entity_grid(doc)], smoothing=1.0)
        scores = score_document(doc, model)
        assert len(scores) == 2
        assert not scores[0].uninformative
        assert scores[1].entity_count >= 1
