import itertools

import pytest

from snac.annotations import (
    AggregatedSet,
    AnnotationSet,
    ErrorAnnotation,
    aggregate_annotators,
    trim_span,
    validate_annotation,
    validate_set,
)
from snac.documents import Span
from snac.serialization import (
    aggregated_set_from_dict,
    aggregated_set_to_dict,
    annotation_set_from_dict,
    annotation_set_to_dict,
    summary_from_dict,
    summary_to_dict,
)

from .conftest import CHAR, COREF, INCON, REF, REP, SCENE, ann, make_doc, set_of, span_for


class TestValidateAnnotation:
    def test_well_formed_chare_is_ok(self, small_doc):
        a = ann(small_doc, 0, CHAR, "a1", rel_start=0, rel_end=11)
        assert validate_annotation(a, small_doc) == []

    def test_scene_partial_sentence_violates(self, small_doc):
        a = ann(small_doc, 1, SCENE, "a1", rel_start=0, rel_end=9)
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["scene-not-whole-sentences"]

    def test_scene_whole_sentences_ok(self, small_doc):
        sent0, sent2 = small_doc.sentences[0], small_doc.sentences[2]
        a = ErrorAnnotation(Span(sent0.start, sent2.end, 0), SCENE, "a1")
        assert validate_annotation(a, small_doc) == []

    def test_incone_requires_antecedent(self, small_doc):
        a = ann(small_doc, 2, INCON, "a1")
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["antecedent-required"]

    def test_incone_with_antecedent_ok(self, small_doc):
        a = ErrorAnnotation(
            span=span_for(small_doc, 3),
            category=INCON,
            annotator_id="a1",
            antecedent=span_for(small_doc, 0),
        )
        assert validate_annotation(a, small_doc) == []

    def test_antecedent_forbidden_elsewhere(self, small_doc):
        a = ErrorAnnotation(
            span=span_for(small_doc, 0, rel_end=7),
            category=CHAR,
            annotator_id="a1",
            antecedent=span_for(small_doc, 0, rel_end=3),
        )
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["antecedent-forbidden"]

    def test_antecedent_must_not_come_later(self, small_doc):
        a = ErrorAnnotation(
            span=span_for(small_doc, 0, rel_end=7),
            category=REP,
            annotator_id="a1",
            antecedent=span_for(small_doc, 3),
        )
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["antecedent-after-span"]

    def test_span_outside_text_is_structural(self, small_doc):
        a = ErrorAnnotation(Span(0, 10_000, 0), CHAR, "a1")
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["span-out-of-bounds"]

    def test_span_outside_its_segment(self, small_doc):
        sent3 = small_doc.sentences[3]
        a = ErrorAnnotation(Span(sent3.start, sent3.end, 0), CHAR, "a1")
        codes = [v.code for v in validate_annotation(a, small_doc)]
        assert codes == ["span-outside-segment"]

    def test_unsegmented_document_rejected(self, small_doc):
        from snac.documents import document_from_sentences

        bare = document_from_sentences("doc-1", ["Only one sentence."])
        a = ErrorAnnotation(Span(0, 4, 0), CHAR, "a1")
        with pytest.raises(ValueError):
            validate_annotation(a, bare)

    def test_validate_set_collects_rows(self, small_doc):
        s = set_of(
            small_doc,
            [ann(small_doc, 2, INCON, "a1"), ann(small_doc, 0, CHAR, "a1", rel_end=7)],
        )
        rows = validate_set(s, small_doc)
        assert len(rows) == 1
        assert rows[0][2].code == "antecedent-required"


class TestAnnotationSet:
    def test_annotator_must_be_registered(self, small_doc):
        with pytest.raises(ValueError):
            AnnotationSet(
                "doc-1",
                (ann(small_doc, 0, CHAR, "ghost"),),
                frozenset({"a1"}),
            )

    def test_likert_bounds(self, small_doc):
        with pytest.raises(ValueError):
            set_of(small_doc, [], annotator_ids={"a1"}, likert={"a1": 6})

    def test_empty_annotator_allowed(self, small_doc):
        s = set_of(small_doc, [], annotator_ids={"a1"})
        assert s.annotator_ids == frozenset({"a1"})


class TestAggregation:
    def test_disjoint_union_support_one(self, small_doc):
        sets = [
            set_of(small_doc, [ann(small_doc, i, CHAR, f"a{i}", rel_end=7)])
            for i in range(3)
        ]
        agg = aggregate_annotators(sets, small_doc)
        assert len(agg.annotations) == 3
        assert all(a.support == 1 for a in agg.annotations)

    def test_identical_spans_collapse_with_support(self, small_doc):
        a1 = ann(small_doc, 0, CHAR, "a1", rel_end=11)
        a2 = ann(small_doc, 0, CHAR, "a2", rel_end=11)
        agg = aggregate_annotators(
            [set_of(small_doc, [a1]), set_of(small_doc, [a2])], small_doc
        )
        assert len(agg.annotations) == 1
        assert agg.annotations[0].support == 2
        assert agg.annotations[0].annotators == frozenset({"a1", "a2"})

    def test_whitespace_trimmed_spans_match(self, small_doc):
        base = span_for(small_doc, 1, rel_end=9)
        padded = Span(base.start, base.end + 1, base.segment_index)  # trailing space
        assert small_doc.text[padded.end - 1] == " "
        a1 = ErrorAnnotation(base, REF, "a1")
        a2 = ErrorAnnotation(padded, REF, "a2")
        agg = aggregate_annotators(
            [set_of(small_doc, [a1]), set_of(small_doc, [a2])], small_doc
        )
        assert len(agg.annotations) == 1
        assert agg.annotations[0].support == 2
        assert agg.annotations[0].span == base

    def test_differing_spans_stay_distinct(self, small_doc):
        a1 = ann(small_doc, 0, CHAR, "a1", rel_end=7)
        a2 = ann(small_doc, 0, CHAR, "a2", rel_end=11)
        agg = aggregate_annotators(
            [set_of(small_doc, [a1]), set_of(small_doc, [a2])], small_doc
        )
        assert len(agg.annotations) == 2

    def test_empty_sets_union(self, small_doc):
        sets = [set_of(small_doc, [], annotator_ids={f"a{i}"}) for i in range(3)]
        agg = aggregate_annotators(sets, small_doc)
        assert agg.annotations == ()
        assert agg.annotator_ids == frozenset({"a0", "a1", "a2"})

    def test_mixed_doc_ids_rejected(self, small_doc):
        other = make_doc(["A different doc."], doc_id="doc-2", k=1)
        s1 = set_of(small_doc, [ann(small_doc, 0, CHAR, "a1")])
        s2 = AnnotationSet.build("doc-2", [], annotator_ids={"a2"})
        with pytest.raises(ValueError):
            aggregate_annotators([s1, s2], small_doc)
        with pytest.raises(ValueError):
            aggregate_annotators([s1], other)

    def test_order_independent(self, small_doc):
        sets = [
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a1", rel_end=11)]),
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a2", rel_end=11)]),
            set_of(small_doc, [ann(small_doc, 2, REF, "a3", rel_end=4)]),
        ]
        results = {
            aggregate_annotators(list(perm), small_doc)
            for perm in itertools.permutations(sets)
        }
        assert len(results) == 1

    def test_idempotent(self, small_doc):
        sets = [
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a1", rel_end=11)]),
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a2", rel_end=11)]),
        ]
        agg = aggregate_annotators(sets, small_doc)
        again = aggregate_annotators([agg], small_doc)
        assert again == agg

    def test_support_bounded_by_annotator_count(self, small_doc):
        sets = [
            set_of(small_doc, [ann(small_doc, 0, CHAR, f"a{i}", rel_end=11)])
            for i in range(4)
        ]
        agg = aggregate_annotators(sets, small_doc)
        for record in agg.annotations:
            assert 1 <= record.support <= 4

    def test_trim_span_noop_on_tight_span(self, small_doc):
        s = span_for(small_doc, 0, rel_end=7)
        assert trim_span(s, small_doc.text) is s


class TestRoundTrips:
    def test_summary_round_trip(self, small_doc):
        assert summary_from_dict(summary_to_dict(small_doc)) == small_doc

    def test_random_document_round_trip_property(self):
        from hypothesis import given, strategies as st

        words = st.text(
            alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd")),
            min_size=1,
            max_size=8,
        )
        sentences = st.lists(
            st.builds(lambda ws: " ".join(ws) + ".", st.lists(words, min_size=1, max_size=6)),
            min_size=1,
            max_size=8,
        )

        @given(sentences, st.integers(min_value=1, max_value=4))
        def check(sents, k):
            doc = make_doc(sents, doc_id="rt", k=k)
            assert summary_from_dict(summary_to_dict(doc)) == doc

        check()

    def test_annotation_set_round_trip(self, small_doc):
        s = set_of(
            small_doc,
            [
                ann(small_doc, 0, CHAR, "a1", rel_end=11),
                ErrorAnnotation(
                    span=span_for(small_doc, 3),
                    category=INCON,
                    annotator_id="a1",
                    antecedent=span_for(small_doc, 0),
                ),
                ann(small_doc, 1, COREF, "a1", rel_end=9),
            ],
            likert={"a1": 4},
        )
        assert annotation_set_from_dict(annotation_set_to_dict(s)) == s

    def test_aggregated_round_trip(self, small_doc):
        sets = [
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a1", rel_end=11)]),
            set_of(small_doc, [ann(small_doc, 0, CHAR, "a2", rel_end=11)]),
        ]
        agg = aggregate_annotators(sets, small_doc)
        assert aggregated_set_from_dict(aggregated_set_to_dict(agg)) == agg

    def test_multi_annotator_set_not_a_file(self, small_doc):
        s = set_of(
            small_doc,
            [ann(small_doc, 0, CHAR, "a1"), ann(small_doc, 1, REF, "a2")],
        )
        with pytest.raises(ValueError):
            annotation_set_to_dict(s)

    def test_schema_version_enforced(self, small_doc):
        from snac.errors import SchemaError

        data = summary_to_dict(small_doc)
        data["schema_version"] = "99"
        with pytest.raises(SchemaError):
            summary_from_dict(data)

    def test_unknown_category_rejected_at_parse(self, small_doc):
        from snac.errors import SchemaError

        s = set_of(small_doc, [ann(small_doc, 0, CHAR, "a1")])
        data = annotation_set_to_dict(s)
        data["annotations"][0]["category"] = "MadeUpE"
        with pytest.raises(SchemaError):
            annotation_set_from_dict(data)
