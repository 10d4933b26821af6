import pytest
from hypothesis import given, strategies as st

from kbforge.core.types import (
    AnnotationTask,
    AnnotationValue,
    BenchmarkRecord,
    CompletionEstimate,
    EntityRef,
    InvariantError,
    Prediction,
    PredictionSet,
    RelationSpec,
    ScoredFactCandidate,
    Triple,
    Vote,
    round_half_up,
    validate_relation_spec,
    vote_problems,
)

from .conftest import make_record


class TestEntityRef:
    def test_valid(self):
        ref = EntityRef("Q937", "Albert Einstein")
        assert ref.labeled

    def test_unlabeled(self):
        assert not EntityRef("Q937").labeled

    @pytest.mark.parametrize("bad", ["P103", "Q", "q937", "Q12x", "937", ""])
    def test_bad_id(self, bad):
        with pytest.raises(InvariantError):
            EntityRef(bad)

    def test_blank_label(self):
        with pytest.raises(InvariantError):
            EntityRef("Q1", "   ")


class TestRelationSpecValidation:
    def test_ok(self):
        spec = RelationSpec("P36", "hasCapital", "The capital of [X] is [Y] .")
        assert validate_relation_spec(spec) == []

    def test_missing_placeholders(self):
        spec = RelationSpec("P36", "hasCapital", "No placeholders here.")
        problems = validate_relation_spec(spec)
        assert "missing [X]" in problems and "missing [Y]" in problems

    def test_duplicate_subject(self):
        spec = RelationSpec("P103", "nativeLanguage", "[X] and [X] speak [Y]")
        assert validate_relation_spec(spec) == ["duplicate [X]"]

    def test_bad_pid(self):
        spec = RelationSpec("Q36", "x", "[X] is [Y]")
        assert any("property id" in p for p in validate_relation_spec(spec))


class TestTriple:
    def test_ok(self):
        Triple(EntityRef("Q937"), "P103", EntityRef("Q188"))

    def test_relation_must_be_property(self):
        with pytest.raises(InvariantError):
            Triple(EntityRef("Q937"), "Q103", EntityRef("Q188"))


class TestBenchmarkRecord:
    def test_ok(self):
        rec = make_record("Q937", "Albert Einstein", "P103", [("Q188", "German")])
        assert rec.key == ("Q937", "P103")
        assert rec.object_labels == ("German",)

    def test_empty_objects(self):
        with pytest.raises(InvariantError):
            make_record("Q937", "Albert Einstein", "P103", [])

    def test_duplicate_object_ids(self):
        with pytest.raises(InvariantError):
            make_record(
                "Q937", "Albert Einstein", "P103",
                [("Q188", "German"), ("Q188", "German")],
            )

    def test_unlabeled_object(self):
        with pytest.raises(InvariantError):
            make_record("Q937", "Albert Einstein", "P103", [("Q188", None)])

    def test_unlabeled_subject(self):
        with pytest.raises(InvariantError):
            make_record("Q937", None, "P103", [("Q188", "German")])


class TestPredictionSet:
    def test_ordering_ok(self):
        PredictionSet(
            ("Q1", "P1"),
            (Prediction("a", 0.8, 1), Prediction("b", 0.8, 2), Prediction("c", 0.1, 3)),
        )

    def test_rank_gap(self):
        with pytest.raises(InvariantError):
            PredictionSet(("Q1", "P1"), (Prediction("a", 0.8, 1), Prediction("b", 0.5, 3)))

    def test_increasing_probability(self):
        with pytest.raises(InvariantError):
            PredictionSet(("Q1", "P1"), (Prediction("a", 0.2, 1), Prediction("b", 0.5, 2)))

    def test_error_annotation_requires_empty(self):
        PredictionSet(("Q1", "P1"), (), error="transport: gone")
        with pytest.raises(InvariantError):
            PredictionSet(("Q1", "P1"), (Prediction("a", 0.2, 1),), error="x")

    def test_probability_bounds(self):
        with pytest.raises(InvariantError):
            Prediction("a", 1.2, 1)


CANDIDATE = ScoredFactCandidate(EntityRef("Q1", "Marcus Adams"), "P103", "English", 0.9)


class TestVoteValidation:
    def test_true_with_evidence_ok(self):
        vote = Vote("t1", "a1", AnnotationValue.TRUE, "http://e", "snippet")
        assert vote_problems(vote) == []

    def test_true_without_url_rejected(self):
        vote = Vote("t1", "a1", AnnotationValue.TRUE, None, "snippet")
        assert vote_problems(vote) == ["evidence_url required"]

    def test_false_without_snippet_rejected(self):
        vote = Vote("t1", "a1", AnnotationValue.FALSE, "http://e", "")
        assert vote_problems(vote) == ["snippet required"]

    def test_unknown_with_explanation_ok(self):
        vote = Vote("t1", "a1", AnnotationValue.UNKNOWN, explanation="no sources")
        assert vote_problems(vote) == []

    def test_unknown_without_explanation_rejected(self):
        vote = Vote("t1", "a1", AnnotationValue.UNKNOWN)
        assert vote_problems(vote) == ["explanation required for unknown votes"]

    def test_binary_grouping(self):
        positives = {v for v in AnnotationValue if v.positive}
        assert positives == {AnnotationValue.TRUE, AnnotationValue.PLAUSIBLE}


class TestAnnotationTask:
    def test_stable_id(self):
        a = AnnotationTask.for_candidate(CANDIDATE, "The native language of Marcus Adams is English")
        b = AnnotationTask.for_candidate(CANDIDATE, "The native language of Marcus Adams is English")
        assert a.task_id == b.task_id

    def test_bad_status(self):
        with pytest.raises(InvariantError):
            AnnotationTask("t1", "stmt", CANDIDATE, status="closed")


class TestCompletionEstimate:
    def test_compute_consistency(self):
        est = CompletionEstimate.compute("nativeLanguage", 264_778, 7_871_085, 0.86, 0.82)
        assert est.addable == round_half_up(7_871_085 * 0.86 * 0.82)
        assert est.growth_factor == est.addable / 264_778

    def test_manual_mismatch_rejected(self):
        with pytest.raises(InvariantError):
            CompletionEstimate("r", 100, 1000, 0.5, 0.5, addable=999, growth_factor=9.99)

    def test_zero_accuracy(self):
        est = CompletionEstimate.compute("r", 100, 1000, 0.5, 0.0)
        assert est.addable == 0 and est.growth_factor == 0.0

    def test_zero_cardinality_rejected(self):
        with pytest.raises(InvariantError):
            CompletionEstimate.compute("r", 0, 1000, 0.5, 0.5)

    @given(
        cardinality=st.integers(1, 10_000_000),
        missing=st.integers(0, 10_000_000),
        fraction=st.floats(0, 1),
        accuracy=st.floats(0, 1),
    )
    def test_arithmetic_invariants_hold(self, cardinality, missing, fraction, accuracy):
        est = CompletionEstimate.compute("r", cardinality, missing, fraction, accuracy)
        assert 0 <= est.addable <= missing
        assert est.growth_factor >= 0


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.4999) == 2
    assert round_half_up(363.9276) == 364
