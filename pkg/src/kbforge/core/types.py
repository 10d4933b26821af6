"""Shared domain types for the toolkit.

Everything here is an immutable value object: instances validate their
invariants at construction time and are safe to share across workers.
Comparison/normalization rules for matching predictions against labels
deliberately live in :mod:`kbforge.metrics`, not on the types themselves,
so there is a single source of truth for matching.
"""

from __future__ import annotations

import enum
import hashlib
import math
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

ENTITY_ID_RE = re.compile(r"^Q[0-9]+$")
PROPERTY_ID_RE = re.compile(r"^P[0-9]+$")

SUBJECT_PLACEHOLDER = "[X]"
OBJECT_PLACEHOLDER = "[Y]"


class KbforgeError(Exception):
    """Base class for toolkit errors."""


class InvariantError(KbforgeError, ValueError):
    """A domain type invariant was violated at construction time."""


def is_entity_id(value: str) -> bool:
    return bool(ENTITY_ID_RE.match(value))


def is_property_id(value: str) -> bool:
    return bool(PROPERTY_ID_RE.match(value))


def entity_ordinal(entity_id: str) -> int:
    """Numeric part of a Q/P identifier, for canonical ordering."""
    return int(entity_id[1:])


def round_half_up(x: float) -> int:
    """Round to nearest integer with ties away from zero.

    Used for addable-fact estimates; banker's rounding would not
    reproduce the published completion numbers.
    """
    return int(Decimal(repr(x)).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class EntityRef:
    """A KB entity identifier with an optional human-readable label."""

    id: str
    label: str | None = None

    def __post_init__(self) -> None:
        if not is_entity_id(self.id):
            raise InvariantError(f"not an entity id: {self.id!r}")
        if self.label is not None and not self.label.strip():
            raise InvariantError(f"empty label for {self.id}")

    @property
    def labeled(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class RelationSpec:
    """One relation: its property id, slug, and cloze prompt template.

    The template must contain exactly one subject placeholder ``[X]`` and
    exactly one object placeholder ``[Y]``; use :func:`validate_relation_spec`
    to check before probing. Construction is deliberately permissive so that
    files can be loaded and then validated with error reporting.
    """

    pid: str
    name: str
    template: str
    subject_type: EntityRef | None = None
    dictionary_id: str | None = None


def validate_relation_spec(spec: RelationSpec) -> list[str]:
    """Return every violated invariant of ``spec``; empty list means ok."""
    problems = []
    if not is_property_id(spec.pid):
        problems.append(f"bad property id: {spec.pid!r}")
    if not spec.name.strip():
        problems.append("empty relation name")
    for placeholder in (SUBJECT_PLACEHOLDER, OBJECT_PLACEHOLDER):
        n = spec.template.count(placeholder)
        if n == 0:
            problems.append(f"missing {placeholder}")
        elif n > 1:
            problems.append(f"duplicate {placeholder}")
    return problems


@dataclass(frozen=True)
class Triple:
    """An atomic (subject, relation, object) fact."""

    subject: EntityRef
    relation: str
    object: EntityRef

    def __post_init__(self) -> None:
        if not is_property_id(self.relation):
            raise InvariantError(f"not a property id: {self.relation!r}")


@dataclass(frozen=True)
class BenchmarkRecord:
    """A subject-relation pair with ALL its valid objects.

    Ground truth for existing-fact evaluation: a prediction is correct if it
    matches any valid object. Subject and objects carry labels; unlabeled
    entities are dropped during ingestion, never stored here.
    """

    subject: EntityRef
    relation: str
    valid_objects: tuple[EntityRef, ...]

    def __post_init__(self) -> None:
        if not is_property_id(self.relation):
            raise InvariantError(f"not a property id: {self.relation!r}")
        if not self.subject.labeled:
            raise InvariantError(f"unlabeled subject {self.subject.id}")
        if not self.valid_objects:
            raise InvariantError(f"no valid objects for {self.key}")
        seen = set()
        for obj in self.valid_objects:
            if not obj.labeled:
                raise InvariantError(f"unlabeled object {obj.id} in {self.key}")
            if obj.id in seen:
                raise InvariantError(f"duplicate object {obj.id} in {self.key}")
            seen.add(obj.id)

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject.id, self.relation)

    @property
    def object_labels(self) -> tuple[str, ...]:
        return tuple(obj.label for obj in self.valid_objects)


@dataclass(frozen=True)
class Prediction:
    """One ranked token prediction from a fill-mask backend."""

    token: str
    probability: float
    rank: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise InvariantError(f"probability out of range: {self.probability}")
        if self.rank < 1:
            raise InvariantError(f"rank must be >= 1: {self.rank}")


@dataclass(frozen=True)
class PredictionSet:
    """Ranked predictions for one record key, at most k of them.

    ``error`` is set (and ``predictions`` empty) when a query permanently
    failed; such sets still count in evaluation denominators.
    """

    record_key: tuple[str, str]
    predictions: tuple[Prediction, ...]
    error: str | None = None

    def __post_init__(self) -> None:
        for i, pred in enumerate(self.predictions):
            if pred.rank != i + 1:
                raise InvariantError(
                    f"rank gap at position {i}: got rank {pred.rank}"
                )
            if i and pred.probability > self.predictions[i - 1].probability:
                raise InvariantError(
                    f"probabilities increase at rank {pred.rank} for {self.record_key}"
                )
        if self.error is not None and self.predictions:
            raise InvariantError("error annotation on a non-empty prediction set")

    @property
    def top(self) -> Prediction | None:
        return self.predictions[0] if self.predictions else None


@dataclass(frozen=True)
class ScoredFactCandidate:
    """A predicted object for a pair with no object in the source KB yet."""

    subject: EntityRef
    relation: str
    predicted_object: str
    probability: float

    def __post_init__(self) -> None:
        if not is_property_id(self.relation):
            raise InvariantError(f"not a property id: {self.relation!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise InvariantError(f"probability out of range: {self.probability}")


class AnnotationValue(enum.Enum):
    """Five-value human judgment scale for a predicted fact."""

    TRUE = "true"
    PLAUSIBLE = "plausible"
    UNKNOWN = "unknown"
    IMPLAUSIBLE = "implausible"
    FALSE = "false"

    @property
    def positive(self) -> bool:
        """Binary grouping: true/plausible vs unknown/implausible/false."""
        return self in (AnnotationValue.TRUE, AnnotationValue.PLAUSIBLE)


@dataclass(frozen=True)
class Vote:
    """One annotator's judgment on one task.

    Construction is permissive; :func:`vote_problems` enforces the evidence
    rules so that services can reject invalid submissions with reasons.
    """

    task_id: str
    annotator_id: str
    value: AnnotationValue
    evidence_url: str | None = None
    snippet: str | None = None
    explanation: str | None = None
    timestamp: str = ""


def vote_problems(vote: Vote) -> list[str]:
    """Violations of the evidence/explanation rules; empty means valid.

    Any verdict other than unknown needs an evidence URL plus a supporting
    text snippet; an unknown verdict needs an explanation instead.
    """
    problems = []
    if vote.value is AnnotationValue.UNKNOWN:
        if not (vote.explanation or "").strip():
            problems.append("explanation required for unknown votes")
    else:
        if not (vote.evidence_url or "").strip():
            problems.append("evidence_url required")
        if not (vote.snippet or "").strip():
            problems.append("snippet required")
    return problems


@dataclass(frozen=True)
class AnnotationTask:
    """A verbalized candidate fact queued for human review."""

    task_id: str
    statement: str
    candidate: ScoredFactCandidate
    status: str = "open"

    def __post_init__(self) -> None:
        if self.status not in ("open", "done"):
            raise InvariantError(f"bad task status: {self.status!r}")
        if not self.statement.strip():
            raise InvariantError("empty statement")

    @staticmethod
    def id_for(candidate: ScoredFactCandidate) -> str:
        """Stable content hash so regenerated campaigns dedupe naturally."""
        key = "\x1f".join(
            (candidate.subject.id, candidate.relation, candidate.predicted_object)
        )
        return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def for_candidate(
        cls, candidate: ScoredFactCandidate, statement: str
    ) -> "AnnotationTask":
        return cls(cls.id_for(candidate), statement, candidate)


def _check_fraction(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise InvariantError(f"{name} out of [0,1]: {value}")


@dataclass(frozen=True)
class RelationReport:
    """Per-relation evaluation summary: R@P, threshold, features, baselines."""

    relation: str
    n_records: int
    r_at_p: float
    precision_target: float = 0.90
    threshold_probability: float | None = None
    entropy_normalized: float = 0.0
    unique_objects: int = 0
    single_valuedness: float = 0.0
    vocab_coverage: float = 0.0
    baseline_majority_precision: float = 0.0
    baseline_random_precision: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "r_at_p",
            "entropy_normalized",
            "single_valuedness",
            "vocab_coverage",
            "baseline_majority_precision",
            "baseline_random_precision",
        ):
            _check_fraction(name, getattr(self, name))
        if not 0.0 < self.precision_target <= 1.0:
            raise InvariantError(
                f"precision_target out of (0,1]: {self.precision_target}"
            )
        if (self.threshold_probability is None) != (self.r_at_p == 0.0):
            raise InvariantError(
                "threshold_probability must be present exactly when r_at_p > 0"
            )


@dataclass(frozen=True)
class CompletionEstimate:
    """Growth arithmetic for one relation: how much the KB could gain.

    ``addable`` and ``growth_factor`` are derived fields; use
    :meth:`compute` rather than spelling them out by hand.
    """

    relation: str
    cardinality_wd: int
    n_missing: int
    high_acc_fraction: float
    accuracy: float
    addable: int = field(default=0)
    growth_factor: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.cardinality_wd <= 0:
            raise InvariantError("cardinality_wd must be positive")
        if self.n_missing < 0:
            raise InvariantError("n_missing must be >= 0")
        _check_fraction("high_acc_fraction", self.high_acc_fraction)
        _check_fraction("accuracy", self.accuracy)
        expected = round_half_up(
            self.n_missing * self.high_acc_fraction * self.accuracy
        )
        if self.addable != expected:
            raise InvariantError(
                f"addable {self.addable} != round({self.n_missing} x "
                f"{self.high_acc_fraction} x {self.accuracy}) = {expected}"
            )
        if not math.isclose(
            self.growth_factor, self.addable / self.cardinality_wd
        ):
            raise InvariantError("growth_factor != addable / cardinality_wd")

    @classmethod
    def compute(
        cls,
        relation: str,
        cardinality_wd: int,
        n_missing: int,
        high_acc_fraction: float,
        accuracy: float,
    ) -> "CompletionEstimate":
        if cardinality_wd <= 0:
            raise InvariantError("cardinality_wd must be positive")
        addable = round_half_up(n_missing * high_acc_fraction * accuracy)
        return cls(
            relation=relation,
            cardinality_wd=cardinality_wd,
            n_missing=n_missing,
            high_acc_fraction=high_acc_fraction,
            accuracy=accuracy,
            addable=addable,
            growth_factor=addable / cardinality_wd,
        )
