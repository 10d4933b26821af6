"""Missing-fact candidates: scoring stubs, verbalization, review sampling."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Sequence

from ..core.types import (
    OBJECT_PLACEHOLDER,
    SUBJECT_PLACEHOLDER,
    AnnotationTask,
    EntityRef,
    KbforgeError,
    PredictionSet,
    RelationSpec,
    ScoredFactCandidate,
    entity_ordinal,
)

_TRAILING_CLOZE_PERIOD = re.compile(r"\s*\.\s*$")


@dataclass(frozen=True)
class MissingPairStub:
    """A (subject, relation) pair with no stored object, ready to probe."""

    subject: EntityRef
    relation: str


def stubs_from_pairs(pairs: Sequence[tuple[EntityRef, str]]) -> list[MissingPairStub]:
    return [MissingPairStub(subject, relation) for subject, relation in pairs]


def candidates_from_predictions(
    stubs: Sequence[MissingPairStub],
    prediction_sets: Sequence[PredictionSet],
) -> list[ScoredFactCandidate]:
    """Top-1 prediction per probed pair; failed or empty sets contribute none."""
    by_key = {(stub.subject.id, stub.relation): stub for stub in stubs}
    candidates = []
    for pset in prediction_sets:
        stub = by_key.get(tuple(pset.record_key))
        if stub is None:
            raise KbforgeError(f"no probed pair for key {pset.record_key}")
        top = pset.top
        if top is None:
            continue
        candidates.append(
            ScoredFactCandidate(
                subject=stub.subject,
                relation=stub.relation,
                predicted_object=top.token,
                probability=top.probability,
            )
        )
    return candidates


def verbalize(candidate: ScoredFactCandidate, spec: RelationSpec) -> str:
    """Render the candidate as a bare statement for human review.

    The cloze template's trailing sentence period is stripped: review
    statements are quoted assertions, not model prompts.
    """
    if candidate.relation != spec.pid:
        raise KbforgeError(
            f"candidate relation {candidate.relation} does not match spec {spec.pid}"
        )
    if not candidate.predicted_object.strip():
        raise KbforgeError("cannot verbalize an empty predicted object")
    if candidate.subject.label is None:
        raise KbforgeError(f"unlabeled subject {candidate.subject.id}")
    statement = spec.template.replace(
        SUBJECT_PLACEHOLDER, candidate.subject.label
    ).replace(OBJECT_PLACEHOLDER, candidate.predicted_object)
    return _TRAILING_CLOZE_PERIOD.sub("", statement).strip()


def sample_for_review(
    retained: Sequence[ScoredFactCandidate],
    spec: RelationSpec,
    n: int = 50,
    seed: int = 0,
) -> list[AnnotationTask]:
    """Seeded sample of min(n, all) retained candidates as review tasks."""
    if n < 1:
        raise KbforgeError(f"sample size must be >= 1, got {n}")
    # canonical pre-sample order makes the draw independent of caller order
    pool = sorted(
        retained,
        key=lambda c: (entity_ordinal(c.subject.id), c.relation, c.predicted_object),
    )
    rng = random.Random(seed)
    picked = pool if len(pool) <= n else rng.sample(pool, n)
    return [
        AnnotationTask.for_candidate(candidate, verbalize(candidate, spec))
        for candidate in picked
    ]
