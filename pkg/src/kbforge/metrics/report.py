"""Assembling and serializing per-relation evaluation reports."""

from __future__ import annotations

from typing import Iterable, Sequence

from ..core.formats import dump_jsonl, iter_jsonl
from ..core.types import RelationReport
from .features import RelationFeatures
from .ranking import JudgedPrediction, recall_at_precision


def build_relation_report(
    relation: str,
    judged: list[JudgedPrediction],
    features: RelationFeatures,
    majority_precision: float,
    random_precision: float,
    target_p: float = 0.90,
    first_dip: bool = False,
) -> RelationReport:
    r_at_p, threshold = recall_at_precision(judged, target_p, first_dip)
    return RelationReport(
        relation=relation,
        n_records=len(judged),
        r_at_p=r_at_p,
        precision_target=target_p,
        threshold_probability=threshold,
        entropy_normalized=features.entropy_normalized,
        unique_objects=features.unique_objects,
        single_valuedness=features.single_valuedness,
        vocab_coverage=features.vocab_coverage,
        baseline_majority_precision=majority_precision,
        baseline_random_precision=random_precision,
    )


def report_payload(report: RelationReport) -> dict:
    return {
        "relation": report.relation,
        "n_records": report.n_records,
        "r_at_p": report.r_at_p,
        "precision_target": report.precision_target,
        "threshold_probability": report.threshold_probability,
        "entropy_normalized": report.entropy_normalized,
        "unique_objects": report.unique_objects,
        "single_valuedness": report.single_valuedness,
        "vocab_coverage": report.vocab_coverage,
        "baseline_majority_precision": report.baseline_majority_precision,
        "baseline_random_precision": report.baseline_random_precision,
    }


def serialize_reports(
    reports: Iterable[RelationReport], provenance: dict | None = None
) -> str:
    return dump_jsonl((report_payload(r) for r in reports), provenance)


def parse_reports(lines: Iterable[str]) -> list[RelationReport]:
    return [RelationReport(**payload) for _, payload in iter_jsonl(lines)]


_AGGREGATE_COLUMNS = (
    ("relation", 24),
    ("n", 8),
    ("R@P", 8),
    ("threshold", 10),
    ("entropy", 8),
    ("objects", 8),
    ("single", 7),
    ("vocab", 6),
    ("maj-P", 6),
    ("rand-P", 7),
)


def aggregate_table(reports: Sequence[RelationReport]) -> str:
    """Fixed-width text table over all relations, one row per relation."""
    header = "  ".join(name.ljust(width) for name, width in _AGGREGATE_COLUMNS)
    rows = [header, "-" * len(header)]
    for rep in sorted(reports, key=lambda r: r.relation):
        threshold = "-" if rep.threshold_probability is None else f"{rep.threshold_probability:.4f}"
        cells = (
            rep.relation,
            str(rep.n_records),
            f"{rep.r_at_p:.4f}",
            threshold,
            f"{rep.entropy_normalized:.4f}",
            str(rep.unique_objects),
            f"{rep.single_valuedness:.3f}",
            f"{rep.vocab_coverage:.3f}",
            f"{rep.baseline_majority_precision:.3f}",
            f"{rep.baseline_random_precision:.3f}",
        )
        rows.append(
            "  ".join(
                cell.ljust(width) for cell, (_, width) in zip(cells, _AGGREGATE_COLUMNS)
            ).rstrip()
        )
    return "\n".join(rows) + "\n"
