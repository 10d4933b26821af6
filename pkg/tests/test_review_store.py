import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kbforge.core.types import (
    AnnotationTask,
    AnnotationValue,
    EntityRef,
    ScoredFactCandidate,
    Vote,
)
from kbforge.review.store import (
    ReviewError,
    ReviewStore,
    agreement,
    campaign_id_for,
    export_accepted,
    resolve_verdict,
    task_from_payload,
    task_to_payload,
    vote_from_payload,
    vote_to_payload,
)

V = AnnotationValue


def make_task(i, relation="P103", prediction=None):
    candidate = ScoredFactCandidate(
        EntityRef(f"Q{i + 1}", f"subject {i + 1}"),
        relation,
        prediction or f"token{i + 1}",
        0.9,
    )
    return AnnotationTask.for_candidate(candidate, f"subject {i + 1} statement")


def make_vote(task_id, annotator, value, timestamp="2026-01-01T00:00:00+00:00"):
    """A vote that satisfies whatever evidence rule its value demands."""
    if value is V.UNKNOWN:
        return Vote(task_id, annotator, value, explanation="cannot verify", timestamp=timestamp)
    return Vote(
        task_id,
        annotator,
        value,
        evidence_url="https://example.org/evidence",
        snippet="supporting text",
        timestamp=timestamp,
    )


@pytest.fixture
def store(tmp_path):
    with ReviewStore(tmp_path / "events.jsonl") as s:
        yield s


class TestCreateCampaign:
    def test_350_tasks_all_open(self, store):
        tasks = [make_task(i) for i in range(350)]
        campaign_id, created = store.create_campaign(tasks)
        assert created
        snapshot = store.campaign(campaign_id)
        assert len(snapshot.tasks) == 350
        assert all(task.status == "open" for task in snapshot.tasks)

    def test_empty_rejected(self, store):
        with pytest.raises(ReviewError, match="at least one task") as err:
            store.create_campaign([])
        assert err.value.code == "validation"

    def test_duplicate_task_ids_conflict(self, store):
        task = make_task(0)
        with pytest.raises(ReviewError, match="duplicate task id") as err:
            store.create_campaign([task, task])
        assert err.value.code == "conflict"

    def test_identical_payload_is_absorbed(self, store):
        tasks = [make_task(i) for i in range(5)]
        first_id, created_first = store.create_campaign(tasks)
        size_after_first = store.path.stat().st_size
        second_id, created_second = store.create_campaign(tasks)
        assert (first_id, created_first) == (second_id, True)
        assert created_second is False
        assert store.path.stat().st_size == size_after_first
        assert store.campaign_ids() == (first_id,)

    def test_different_payloads_coexist(self, store):
        id_a, _ = store.create_campaign([make_task(i) for i in range(3)])
        id_b, _ = store.create_campaign([make_task(i) for i in range(3, 6)])
        assert id_a != id_b
        assert set(store.campaign_ids()) == {id_a, id_b}

    def test_campaign_id_is_content_hash(self):
        tasks = [make_task(i) for i in range(4)]
        assert campaign_id_for(tasks) == campaign_id_for(list(tasks))
        assert campaign_id_for(tasks) != campaign_id_for(tasks[:3])

    def test_interrupted_creation_heals_on_repost(self, tmp_path):
        # hand-write a log holding only a prefix of the campaign, as a
        # crash between task-created events would leave it
        tasks = [make_task(i) for i in range(5)]
        campaign_id = campaign_id_for(tasks)
        log = tmp_path / "events.jsonl"
        with open(log, "w", encoding="utf-8") as fp:
            for task in tasks[:2]:
                event = {
                    "event": "task-created",
                    "campaign_id": campaign_id,
                    "created_at": "2026-01-01T00:00:00+00:00",
                    "task": task_to_payload(task),
                }
                fp.write(json.dumps(event) + "\n")
        with ReviewStore(log) as store:
            assert len(store.campaign(campaign_id).tasks) == 2
            healed_id, created = store.create_campaign(tasks)
            assert healed_id == campaign_id
            assert created is False
            assert len(store.campaign(campaign_id).tasks) == 5


class TestNextTask:
    def test_fresh_campaign_serves_first_task(self, store):
        tasks = [make_task(i) for i in range(3)]
        campaign_id, _ = store.create_campaign(tasks)
        nxt = store.next_task(campaign_id, "alice")
        assert nxt is not None
        assert nxt.task_id == tasks[0].task_id

    def test_exhausted_annotator_gets_none(self, store):
        tasks = [make_task(i) for i in range(3)]
        campaign_id, _ = store.create_campaign(tasks)
        for task in tasks:
            store.submit_vote(campaign_id, make_vote(task.task_id, "alice", V.TRUE))
        assert store.next_task(campaign_id, "alice") is None

    def test_two_annotators_each_see_every_task_once(self, store):
        tasks = [make_task(i) for i in range(6)]
        campaign_id, _ = store.create_campaign(tasks)
        seen = {"alice": [], "bob": []}
        while True:
            progressed = False
            for annotator in ("alice", "bob"):
                task = store.next_task(campaign_id, annotator)
                if task is not None:
                    seen[annotator].append(task.task_id)
                    store.submit_vote(
                        campaign_id, make_vote(task.task_id, annotator, V.TRUE)
                    )
                    progressed = True
            if not progressed:
                break
        expected = [task.task_id for task in tasks]
        assert seen["alice"] == expected
        assert seen["bob"] == expected

    def test_done_task_still_served_to_other_annotators(self, store):
        tasks = [make_task(i) for i in range(2)]
        campaign_id, _ = store.create_campaign(tasks)
        store.submit_vote(campaign_id, make_vote(tasks[0].task_id, "alice", V.TRUE))
        assert store.campaign(campaign_id).tasks[0].status == "done"
        nxt = store.next_task(campaign_id, "bob")
        assert nxt is not None and nxt.task_id == tasks[0].task_id

    def test_unknown_campaign_not_found(self, store):
        with pytest.raises(ReviewError, match="unknown campaign") as err:
            store.next_task("feedfacefeedface", "alice")
        assert err.value.code == "not-found"


class TestSubmitVote:
    @pytest.fixture
    def campaign(self, store):
        tasks = [make_task(i) for i in range(4)]
        campaign_id, _ = store.create_campaign(tasks)
        return campaign_id, tasks

    def test_true_with_evidence_accepted(self, store, campaign):
        campaign_id, tasks = campaign
        store.submit_vote(campaign_id, make_vote(tasks[0].task_id, "alice", V.TRUE))
        snapshot = store.campaign(campaign_id)
        assert snapshot.votes[-1].value is V.TRUE
        assert snapshot.task(tasks[0].task_id).status == "done"

    def test_plausible_with_evidence_accepted(self, store, campaign):
        campaign_id, tasks = campaign
        store.submit_vote(
            campaign_id, make_vote(tasks[1].task_id, "alice", V.PLAUSIBLE)
        )
        assert store.campaign(campaign_id).votes[-1].value is V.PLAUSIBLE

    def test_unknown_with_explanation_no_url_accepted(self, store, campaign):
        campaign_id, tasks = campaign
        vote = Vote(
            tasks[2].task_id,
            "alice",
            V.UNKNOWN,
            explanation="no reliable source found",
        )
        store.submit_vote(campaign_id, vote)
        stored = store.campaign(campaign_id).votes[-1]
        assert stored.value is V.UNKNOWN
        assert stored.evidence_url is None

    def test_true_without_url_rejected(self, store, campaign):
        campaign_id, tasks = campaign
        bad = Vote(tasks[0].task_id, "alice", V.TRUE, snippet="text only")
        with pytest.raises(ReviewError, match="evidence_url required") as err:
            store.submit_vote(campaign_id, bad)
        assert err.value.code == "validation"
        assert store.campaign(campaign_id).votes == ()

    def test_unknown_without_explanation_rejected(self, store, campaign):
        campaign_id, tasks = campaign
        bad = Vote(tasks[0].task_id, "alice", V.UNKNOWN)
        with pytest.raises(ReviewError, match="explanation required"):
            store.submit_vote(campaign_id, bad)

    def test_duplicate_vote_rejected(self, store, campaign):
        campaign_id, tasks = campaign
        store.submit_vote(campaign_id, make_vote(tasks[0].task_id, "alice", V.TRUE))
        with pytest.raises(ReviewError, match="already voted") as err:
            store.submit_vote(
                campaign_id, make_vote(tasks[0].task_id, "alice", V.FALSE)
            )
        assert err.value.code == "conflict"
        # a different annotator on the same task is not a duplicate
        store.submit_vote(campaign_id, make_vote(tasks[0].task_id, "bob", V.FALSE))

    def test_false_without_snippet_rejected(self, store, campaign):
        campaign_id, tasks = campaign
        bad = Vote(
            tasks[0].task_id, "alice", V.FALSE, evidence_url="https://example.org"
        )
        with pytest.raises(ReviewError, match="snippet required"):
            store.submit_vote(campaign_id, bad)

    def test_unknown_task_rejected(self, store, campaign):
        campaign_id, _ = campaign
        with pytest.raises(ReviewError, match="unknown task"):
            store.submit_vote(campaign_id, make_vote("0" * 16, "alice", V.TRUE))

    def test_blank_timestamp_filled_in(self, store, campaign):
        campaign_id, tasks = campaign
        store.submit_vote(
            campaign_id, make_vote(tasks[0].task_id, "alice", V.TRUE, timestamp="")
        )
        assert store.campaign(campaign_id).votes[-1].timestamp


class TestCrashReplay:
    def test_replay_reconstructs_identical_state(self, tmp_path):
        log = tmp_path / "events.jsonl"
        tasks = [make_task(i) for i in range(10)]
        with ReviewStore(log) as store:
            campaign_id, _ = store.create_campaign(
                tasks, created_at="2026-02-03T04:05:06+00:00"
            )
            for task in tasks[:4]:
                store.submit_vote(campaign_id, make_vote(task.task_id, "alice", V.TRUE))
            store.submit_vote(
                campaign_id, make_vote(tasks[0].task_id, "bob", V.PLAUSIBLE)
            )
            before = store.campaign(campaign_id)
        # reopening mid-campaign is the kill-and-restart scenario
        with ReviewStore(log) as revived:
            after = revived.campaign(campaign_id)
            assert after == before
            assert after.created_at == "2026-02-03T04:05:06+00:00"
            assert [t.status for t in after.tasks] == [t.status for t in before.tasks]
            # the revived store keeps accepting work
            revived.submit_vote(
                campaign_id, make_vote(tasks[4].task_id, "bob", V.FALSE)
            )
            assert len(revived.campaign(campaign_id).votes) == 6

    def test_corrupt_log_line_reported(self, tmp_path):
        log = tmp_path / "events.jsonl"
        log.write_text('{"event": "task-created"\n', encoding="utf-8")
        with pytest.raises(ReviewError, match="line 1"):
            ReviewStore(log)


class TestAgreement:
    def build_votes(self, spec):
        """spec: list of (value_a, value_b) per shared task."""
        votes_a, votes_b = [], []
        for i, (va, vb) in enumerate(spec):
            task_id = f"{i:016x}"
            votes_a.append(make_vote(task_id, "a", va))
            votes_b.append(make_vote(task_id, "b", vb))
        return votes_a, votes_b

    def test_identical_sets(self):
        votes_a, votes_b = self.build_votes([(V.TRUE, V.TRUE), (V.FALSE, V.FALSE)])
        assert agreement(votes_a, votes_b) == (1.0, 1.0)

    def test_true_vs_plausible_agrees_only_binary(self):
        votes_a, votes_b = self.build_votes([(V.TRUE, V.PLAUSIBLE)])
        assert agreement(votes_a, votes_b) == (0.0, 1.0)

    def test_hundred_task_fixture(self):
        spec = (
            [(V.TRUE, V.TRUE)] * 40
            + [(V.FALSE, V.FALSE)] * 20
            + [(V.UNKNOWN, V.UNKNOWN)] * 9
            + [(V.TRUE, V.PLAUSIBLE)] * 25
            + [(V.TRUE, V.FALSE)] * 6
        )
        assert len(spec) == 100
        votes_a, votes_b = self.build_votes(spec)
        assert agreement(votes_a, votes_b) == (0.69, 0.94)

    def test_task_set_mismatch_rejected(self):
        votes_a, _ = self.build_votes([(V.TRUE, V.TRUE)])
        _, votes_b = self.build_votes([(V.TRUE, V.TRUE), (V.TRUE, V.TRUE)])
        with pytest.raises(ReviewError, match="different task ids"):
            agreement(votes_a, votes_b)

    def test_empty_rejected(self):
        with pytest.raises(ReviewError, match="no votes"):
            agreement([], [])

    def test_store_level_agreement(self, store):
        tasks = [make_task(i) for i in range(4)]
        campaign_id, _ = store.create_campaign(tasks)
        pairs = [(V.TRUE, V.TRUE), (V.TRUE, V.PLAUSIBLE), (V.FALSE, V.FALSE), (V.TRUE, V.FALSE)]
        for task, (va, vb) in zip(tasks, pairs):
            store.submit_vote(campaign_id, make_vote(task.task_id, "alice", va))
            store.submit_vote(campaign_id, make_vote(task.task_id, "bob", vb))
        exact, binary = store.agreement_between(campaign_id, "alice", "bob")
        assert (exact, binary) == (0.5, 0.75)

    @given(
        values=st.lists(
            st.tuples(st.sampled_from(list(V)), st.sampled_from(list(V))),
            min_size=1,
            max_size=30,
        )
    )
    def test_exact_never_exceeds_binary(self, values):
        votes_a, votes_b = self.build_votes(values)
        exact, binary = agreement(votes_a, votes_b)
        assert 0.0 <= exact <= binary <= 1.0
        assert agreement(votes_b, votes_a) == (exact, binary)


class TestResolveVerdict:
    def test_no_votes_is_none(self):
        assert resolve_verdict([]) is None

    def test_single_vote_wins(self):
        assert resolve_verdict([make_vote("t", "a", V.PLAUSIBLE)]) is V.PLAUSIBLE

    def test_majority_wins(self):
        votes = [
            make_vote("t", "a", V.TRUE),
            make_vote("t", "b", V.TRUE),
            make_vote("t", "c", V.FALSE),
        ]
        assert resolve_verdict(votes) is V.TRUE

    def test_tie_breaks_toward_least_accepting(self):
        votes = [make_vote("t", "a", V.TRUE), make_vote("t", "b", V.FALSE)]
        assert resolve_verdict(votes) is V.FALSE
        votes = [make_vote("t", "a", V.PLAUSIBLE), make_vote("t", "b", V.UNKNOWN)]
        assert resolve_verdict(votes) is V.UNKNOWN


class TestExport:
    def voted_campaign(self, store, verdict_counts, relation="P103"):
        """One task per vote, verdicts dealt out in enum order."""
        deals = []
        for value, count in verdict_counts.items():
            deals.extend([value] * count)
        tasks = [make_task(i, relation=relation) for i in range(len(deals))]
        campaign_id, _ = store.create_campaign(tasks)
        for task, value in zip(tasks, deals):
            store.submit_vote(campaign_id, make_vote(task.task_id, "alice", value))
        return campaign_id

    def test_human_results_fixture_strict_and_plausible(self, store):
        # 50 native-language judgments: 48% true, 34% plausible, 6%
        # unknown, 8% implausible, 4% false
        counts = {V.TRUE: 24, V.PLAUSIBLE: 17, V.UNKNOWN: 3, V.IMPLAUSIBLE: 4, V.FALSE: 2}
        campaign_id = self.voted_campaign(store, counts)
        snapshot = store.campaign(campaign_id)
        strict, summary = export_accepted(snapshot, "strict")
        plausible, _ = export_accepted(snapshot, "plausible")
        assert len(strict) == 24
        assert len(plausible) == 41
        strict_ids = {a["task_id"] for a in strict}
        plausible_ids = {a["task_id"] for a in plausible}
        assert strict_ids <= plausible_ids
        assert summary == {
            "P103": {
                "true": 24,
                "plausible": 17,
                "unknown": 3,
                "implausible": 4,
                "false": 2,
            }
        }

    def test_mostly_true_fixture(self, store):
        counts = {V.TRUE: 41, V.FALSE: 9}
        campaign_id = self.voted_campaign(store, counts)
        strict, _ = export_accepted(store.campaign(campaign_id), "strict")
        assert len(strict) == 41

    def test_no_votes_zeroed_summary(self, store):
        campaign_id, _ = store.create_campaign([make_task(0), make_task(1, "P1412")])
        assertions, summary = export_accepted(store.campaign(campaign_id), "strict")
        assert assertions == []
        zero = {v.value: 0 for v in V}
        assert summary == {"P103": zero, "P1412": zero}

    def test_unknown_policy_rejected(self, store):
        campaign_id, _ = store.create_campaign([make_task(0)])
        with pytest.raises(ReviewError, match="unknown policy"):
            export_accepted(store.campaign(campaign_id), "lenient")

    def test_assertions_carry_evidence(self, store):
        campaign_id = self.voted_campaign(store, {V.TRUE: 1})
        (assertion,), _ = export_accepted(store.campaign(campaign_id), "strict")
        assert assertion["evidence_urls"] == ["https://example.org/evidence"]
        assert assertion["subject_id"] == "Q1"
        assert assertion["relation_id"] == "P103"
        assert assertion["verdict"] == "true"


class TestPayloadRoundTrips:
    def test_task_payload_round_trip(self):
        task = make_task(7, relation="P1412")
        assert task_from_payload(task_to_payload(task)) == task

    def test_vote_payload_round_trip(self):
        for value in V:
            vote = make_vote("0" * 16, "alice", value)
            assert vote_from_payload(vote_to_payload(vote)) == vote

    def test_vote_value_parsing_is_case_insensitive(self):
        payload = vote_to_payload(make_vote("0" * 16, "alice", V.TRUE))
        payload["value"] = "True"
        assert vote_from_payload(payload).value is V.TRUE

    def test_bad_value_rejected(self):
        payload = vote_to_payload(make_vote("0" * 16, "alice", V.TRUE))
        payload["value"] = "maybe"
        with pytest.raises(ReviewError, match="invalid vote payload"):
            vote_from_payload(payload)
