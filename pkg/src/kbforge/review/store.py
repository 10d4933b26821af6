"""Append-only persistence and state for annotation campaigns.

The event log is line-delimited JSON with exactly two event types, one
example of each:

    {"campaign_id":"a1b2...","created_at":"2026-01-01T00:00:00+00:00","event":"task-created","task":{...}}
    {"campaign_id":"a1b2...","event":"vote-submitted","vote":{...}}

Campaign state is a pure fold over the log: replaying the file after a
crash reconstructs the exact in-memory state, and every human judgment
stays auditable because nothing is ever rewritten in place. All writes
serialize through one appender lock; readers work against immutable
snapshots and never block.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..core.formats import json_line
from ..core.types import (
    AnnotationTask,
    AnnotationValue,
    EntityRef,
    KbforgeError,
    ScoredFactCandidate,
    Vote,
    vote_problems,
)

# least accepting first: ties between equally common verdicts resolve down
_CONSERVATIVE_ORDER = (
    AnnotationValue.FALSE,
    AnnotationValue.IMPLAUSIBLE,
    AnnotationValue.UNKNOWN,
    AnnotationValue.PLAUSIBLE,
    AnnotationValue.TRUE,
)

EXPORT_POLICIES = ("strict", "plausible")


class ReviewError(KbforgeError):
    """A review operation failed; ``code`` maps onto an HTTP status."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message


def _not_found(message: str) -> ReviewError:
    return ReviewError("not-found", message)


def _validation(message: str) -> ReviewError:
    return ReviewError("validation", message)


def _conflict(message: str) -> ReviewError:
    return ReviewError("conflict", message)


def task_to_payload(task: AnnotationTask) -> dict:
    return {
        "task_id": task.task_id,
        "statement": task.statement,
        "status": task.status,
        "candidate": {
            "subject_id": task.candidate.subject.id,
            "subject_label": task.candidate.subject.label,
            "relation_id": task.candidate.relation,
            "predicted_object": task.candidate.predicted_object,
            "probability": task.candidate.probability,
        },
    }


def task_from_payload(payload: dict) -> AnnotationTask:
    try:
        raw = payload["candidate"]
        candidate = ScoredFactCandidate(
            subject=EntityRef(raw["subject_id"], raw.get("subject_label")),
            relation=raw["relation_id"],
            predicted_object=raw["predicted_object"],
            probability=raw["probability"],
        )
        return AnnotationTask(
            task_id=payload["task_id"],
            statement=payload["statement"],
            candidate=candidate,
            status=payload.get("status", "open"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise _validation(f"invalid task payload: {exc}") from exc


def vote_to_payload(vote: Vote) -> dict:
    payload = {
        "task_id": vote.task_id,
        "annotator_id": vote.annotator_id,
        "value": vote.value.value,
        "timestamp": vote.timestamp,
    }
    for key in ("evidence_url", "snippet", "explanation"):
        value = getattr(vote, key)
        if value is not None:
            payload[key] = value
    return payload


def vote_from_payload(payload: dict) -> Vote:
    try:
        value = AnnotationValue(str(payload["value"]).strip().lower())
        return Vote(
            task_id=payload["task_id"],
            annotator_id=payload["annotator_id"],
            value=value,
            evidence_url=payload.get("evidence_url"),
            snippet=payload.get("snippet"),
            explanation=payload.get("explanation"),
            timestamp=payload.get("timestamp", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise _validation(f"invalid vote payload: {exc}") from exc


def campaign_id_for(tasks: Sequence[AnnotationTask]) -> str:
    """Content hash of the task ids, so identical payloads collide on purpose."""
    key = "\x1f".join(task.task_id for task in tasks)
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


def resolve_verdict(votes: Sequence[Vote]) -> AnnotationValue | None:
    """Modal annotation value; ties break toward the least accepting one."""
    if not votes:
        return None
    counts = {value: 0 for value in _CONSERVATIVE_ORDER}
    for vote in votes:
        counts[vote.value] += 1
    best = max(counts.values())
    for value in _CONSERVATIVE_ORDER:
        if counts[value] == best:
            return value
    raise AssertionError("unreachable: counts cover every value")


def agreement(
    votes_a: Iterable[Vote], votes_b: Iterable[Vote]
) -> tuple[float, float]:
    """Pairwise annotator agreement over one shared task set.

    Returns (exact, binary): the fraction of tasks with identical values
    and the fraction agreeing after collapsing to positive (true or
    plausible) versus negative (unknown, implausible, false). Exact can
    never exceed binary because identical values always share a side.
    """
    by_task_a = {vote.task_id: vote.value for vote in votes_a}
    by_task_b = {vote.task_id: vote.value for vote in votes_b}
    if set(by_task_a) != set(by_task_b):
        raise _validation("vote sets cover different task ids")
    if not by_task_a:
        raise _validation("no votes to compare")
    exact = sum(1 for t, v in by_task_a.items() if by_task_b[t] is v)
    binary = sum(
        1 for t, v in by_task_a.items() if by_task_b[t].positive == v.positive
    )
    return exact / len(by_task_a), binary / len(by_task_a)


@dataclass(frozen=True)
class CampaignSnapshot:
    """Immutable view of one campaign; every write produces a new one."""

    campaign_id: str
    created_at: str
    tasks: tuple[AnnotationTask, ...]
    votes: tuple[Vote, ...]

    @cached_property
    def _task_by_id(self) -> Mapping[str, AnnotationTask]:
        return {task.task_id: task for task in self.tasks}

    @cached_property
    def votes_by_task(self) -> Mapping[str, tuple[Vote, ...]]:
        grouped: dict[str, list[Vote]] = {}
        for vote in self.votes:
            grouped.setdefault(vote.task_id, []).append(vote)
        return {task_id: tuple(group) for task_id, group in grouped.items()}

    @cached_property
    def annotators(self) -> tuple[str, ...]:
        return tuple(sorted({vote.annotator_id for vote in self.votes}))

    def task(self, task_id: str) -> AnnotationTask:
        try:
            return self._task_by_id[task_id]
        except KeyError:
            raise _validation(f"unknown task: {task_id}") from None

    def has_task(self, task_id: str) -> bool:
        return task_id in self._task_by_id

    def has_voted(self, task_id: str, annotator_id: str) -> bool:
        return any(
            vote.annotator_id == annotator_id
            for vote in self.votes_by_task.get(task_id, ())
        )

    def votes_by(self, annotator_id: str) -> tuple[Vote, ...]:
        return tuple(v for v in self.votes if v.annotator_id == annotator_id)

    def next_task(self, annotator_id: str) -> AnnotationTask | None:
        """First task, in creation order, this annotator has not judged.

        Selection is per annotator: a task another annotator already
        judged (hence globally done) is still served here, so every
        participant works through the full campaign exactly once.
        """
        for task in self.tasks:
            if not self.has_voted(task.task_id, annotator_id):
                return task
        return None

    def verdicts(self) -> Mapping[str, AnnotationValue]:
        """Resolved verdict per judged task, in task order."""
        out = {}
        for task in self.tasks:
            verdict = resolve_verdict(self.votes_by_task.get(task.task_id, ()))
            if verdict is not None:
                out[task.task_id] = verdict
        return out

    def histogram(self) -> dict[str, dict[str, int]]:
        """Per-relation counts of each annotation value over resolved verdicts."""
        relations = sorted({task.candidate.relation for task in self.tasks})
        counts = {
            relation: {value.value: 0 for value in AnnotationValue}
            for relation in relations
        }
        verdicts = self.verdicts()
        for task in self.tasks:
            verdict = verdicts.get(task.task_id)
            if verdict is not None:
                counts[task.candidate.relation][verdict.value] += 1
        return counts


def export_accepted(
    snapshot: CampaignSnapshot, policy: str
) -> tuple[list[dict], dict[str, dict[str, int]]]:
    """Accepted fact assertions plus the per-relation verdict histogram.

    ``strict`` keeps tasks whose resolved verdict is true (every stored
    true vote carries evidence by validation); ``plausible`` additionally
    keeps plausible ones.
    """
    if policy not in EXPORT_POLICIES:
        raise _validation(
            f"unknown policy: {policy!r} (expected one of {', '.join(EXPORT_POLICIES)})"
        )
    accepted = {AnnotationValue.TRUE}
    if policy == "plausible":
        accepted.add(AnnotationValue.PLAUSIBLE)
    verdicts = snapshot.verdicts()
    assertions = []
    for task in snapshot.tasks:
        verdict = verdicts.get(task.task_id)
        if verdict not in accepted:
            continue
        evidence = [
            vote.evidence_url
            for vote in snapshot.votes_by_task.get(task.task_id, ())
            if vote.value is verdict and vote.evidence_url
        ]
        assertions.append(
            {
                "task_id": task.task_id,
                "subject_id": task.candidate.subject.id,
                "subject_label": task.candidate.subject.label,
                "relation_id": task.candidate.relation,
                "predicted_object": task.candidate.predicted_object,
                "probability": task.candidate.probability,
                "statement": task.statement,
                "verdict": verdict.value,
                "evidence_urls": evidence,
            }
        )
    return assertions, snapshot.histogram()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class ReviewStore:
    """Durable campaign registry backed by one append-only event log."""

    def __init__(self, path: str | Path) -> None:
        self._path = Path(path)
        self._lock = threading.Lock()
        self._campaigns: dict[str, CampaignSnapshot] = {}
        if self._path.exists():
            with open(self._path, encoding="utf-8") as fp:
                for line_no, line in enumerate(fp, start=1):
                    if not line.strip():
                        continue
                    try:
                        event = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise _validation(
                            f"corrupt event log at line {line_no}: {exc}"
                        ) from exc
                    self._apply(event, line_no=line_no)
        self._fh = open(self._path, "a", encoding="utf-8")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "ReviewStore":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    @property
    def path(self) -> Path:
        return self._path

    def campaign_ids(self) -> tuple[str, ...]:
        return tuple(self._campaigns)

    def campaign(self, campaign_id: str) -> CampaignSnapshot:
        try:
            return self._campaigns[campaign_id]
        except KeyError:
            raise _not_found(f"unknown campaign: {campaign_id}") from None

    def create_campaign(
        self, tasks: Sequence[AnnotationTask], created_at: str | None = None
    ) -> tuple[str, bool]:
        """Persist a campaign; returns (campaign_id, newly_created).

        Identical payloads hash to the same id and are absorbed without
        writing anything, so re-posting a generated batch cannot duplicate
        work.
        """
        tasks = tuple(tasks)
        if not tasks:
            raise _validation("campaign needs at least one task")
        seen: set[str] = set()
        for task in tasks:
            if task.task_id in seen:
                raise _conflict(f"duplicate task id: {task.task_id}")
            seen.add(task.task_id)
        campaign_id = campaign_id_for(tasks)
        with self._lock:
            existing = self._campaigns.get(campaign_id)
            start = 0
            if existing is not None:
                stored = [task.task_id for task in existing.tasks]
                wanted = [task.task_id for task in tasks]
                if stored == wanted:
                    return campaign_id, False
                if stored != wanted[: len(stored)]:
                    raise _conflict(
                        f"campaign {campaign_id} exists with different tasks"
                    )
                # a crash mid-creation left a prefix; append the missing tail
                start = len(stored)
            stamp = existing.created_at if existing else (created_at or _utcnow())
            for task in tasks[start:]:
                # campaigns always start open regardless of caller state
                payload = task_to_payload(dataclasses.replace(task, status="open"))
                self._append(
                    {
                        "event": "task-created",
                        "campaign_id": campaign_id,
                        "created_at": stamp,
                        "task": payload,
                    }
                )
            self._fh.flush()
        return campaign_id, start == 0

    def submit_vote(self, campaign_id: str, vote: Vote) -> None:
        """Validate and persist one judgment; linearizable per task."""
        with self._lock:
            snapshot = self.campaign(campaign_id)
            if not snapshot.has_task(vote.task_id):
                raise _validation(f"unknown task: {vote.task_id}")
            if snapshot.has_voted(vote.task_id, vote.annotator_id):
                raise _conflict(
                    f"already voted: {vote.annotator_id} on {vote.task_id}"
                )
            problems = vote_problems(vote)
            if problems:
                raise _validation("; ".join(problems))
            if not vote.timestamp:
                vote = dataclasses.replace(vote, timestamp=_utcnow())
            self._append(
                {
                    "event": "vote-submitted",
                    "campaign_id": campaign_id,
                    "vote": vote_to_payload(vote),
                }
            )
            self._fh.flush()

    def next_task(self, campaign_id: str, annotator_id: str) -> AnnotationTask | None:
        return self.campaign(campaign_id).next_task(annotator_id)

    def agreement_between(
        self, campaign_id: str, annotator_a: str, annotator_b: str
    ) -> tuple[float, float]:
        snapshot = self.campaign(campaign_id)
        return agreement(
            snapshot.votes_by(annotator_a), snapshot.votes_by(annotator_b)
        )

    def summary(self, campaign_id: str) -> dict:
        snapshot = self.campaign(campaign_id)
        done = sum(1 for task in snapshot.tasks if task.status == "done")
        return {
            "campaign_id": snapshot.campaign_id,
            "created_at": snapshot.created_at,
            "n_tasks": len(snapshot.tasks),
            "n_open": len(snapshot.tasks) - done,
            "n_done": done,
            "annotators": list(snapshot.annotators),
            "histogram": snapshot.histogram(),
        }

    def _append(self, event: dict) -> None:
        """Write one event and fold it into state; caller holds the lock."""
        self._fh.write(json_line(event) + "\n")
        self._apply(event)

    def _apply(self, event: dict, line_no: int | None = None) -> None:
        where = "" if line_no is None else f" at line {line_no}"
        kind = event.get("event")
        campaign_id = event.get("campaign_id")
        if not campaign_id:
            raise _validation(f"event without campaign_id{where}")
        if kind == "task-created":
            task = task_from_payload(event.get("task") or {})
            old = self._campaigns.get(campaign_id)
            if old is None:
                created_at = event.get("created_at") or ""
                snapshot = CampaignSnapshot(campaign_id, created_at, (task,), ())
            else:
                snapshot = dataclasses.replace(old, tasks=old.tasks + (task,))
            self._campaigns[campaign_id] = snapshot
        elif kind == "vote-submitted":
            vote = vote_from_payload(event.get("vote") or {})
            old = self._campaigns.get(campaign_id)
            if old is None or not old.has_task(vote.task_id):
                raise _validation(f"vote for unknown task{where}: {vote.task_id}")
            tasks = tuple(
                dataclasses.replace(task, status="done")
                if task.task_id == vote.task_id
                else task
                for task in old.tasks
            )
            self._campaigns[campaign_id] = dataclasses.replace(
                old, tasks=tasks, votes=old.votes + (vote,)
            )
        else:
            raise _validation(f"unknown event type{where}: {kind!r}")
