"""Per-relation probability thresholds calibrated from evaluation reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable

from ..core.formats import dump_jsonl, iter_jsonl
from ..core.types import (
    InvariantError,
    KbforgeError,
    RelationReport,
    ScoredFactCandidate,
)


@dataclass(frozen=True)
class ThresholdProfile:
    """The probability cut that kept precision at target for one relation."""

    relation: str
    threshold_probability: float
    target_precision: float
    source_eval_id: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold_probability <= 1.0:
            raise InvariantError(
                f"threshold out of [0,1]: {self.threshold_probability}"
            )
        if not 0.0 < self.target_precision <= 1.0:
            raise InvariantError(
                f"target_precision out of (0,1]: {self.target_precision}"
            )


def calibrate(report: RelationReport, source_eval_id: str = "") -> ThresholdProfile:
    """Project a relation report onto its completion threshold."""
    if report.threshold_probability is None:
        raise KbforgeError(
            f"{report.relation}: no calibratable threshold (recall at "
            f"precision {report.precision_target} is zero); the relation "
            "is unusable for completion"
        )
    return ThresholdProfile(
        relation=report.relation,
        threshold_probability=report.threshold_probability,
        target_precision=report.precision_target,
        source_eval_id=source_eval_id,
    )


def filter_high_accuracy(
    candidates: list[ScoredFactCandidate],
    profile: ThresholdProfile,
) -> tuple[list[ScoredFactCandidate], float]:
    """Candidates at or above the threshold, and the retained fraction.

    The comparison is inclusive: the threshold probability itself belonged
    to the accepted prefix during calibration.
    """
    for candidate in candidates:
        if candidate.relation != profile.relation:
            raise KbforgeError(
                f"candidate relation {candidate.relation} does not match "
                f"profile relation {profile.relation}"
            )
    if not candidates:
        return [], 0.0
    retained = [
        c for c in candidates if c.probability >= profile.threshold_probability
    ]
    return retained, len(retained) / len(candidates)


def serialize_profiles(
    profiles: Iterable[ThresholdProfile], provenance: dict | None = None
) -> str:
    return dump_jsonl((asdict(p) for p in profiles), provenance)


def parse_profiles(lines: Iterable[str]) -> list[ThresholdProfile]:
    return [ThresholdProfile(**payload) for _, payload in iter_jsonl(lines)]
