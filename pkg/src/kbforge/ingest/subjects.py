"""Subject-type frequencies and missing-fact subject pools.

Both scans treat "holds the relation" as having any non-deprecated
statement for it, whatever the value kind: a literal-valued or valueless
statement still occupies the slot, so the fact is not missing.
"""

from __future__ import annotations

import heapq
from collections import Counter
from pathlib import Path
from typing import Iterable

from .._kernels import pair_priority
from ..core.types import EntityRef, KbforgeError, entity_ordinal, is_entity_id
from ._scan import as_line_source, scan_chunks
from .dump import SkipReport, stream_entities


def _type_chunk(lines: list[str], relation: str) -> tuple[SkipReport, Counter]:
    report = SkipReport()
    counts: Counter = Counter()
    for entity in stream_entities(lines, report):
        if is_entity_id(entity.id) and entity.holds(relation):
            counts.update(entity.instance_classes())
    return report, counts


def subject_type_counts(
    source: str | Path | Iterable[str],
    relation: str,
    workers: int = 1,
    report: SkipReport | None = None,
) -> Counter:
    """Direct instance-of class frequencies over subjects holding the relation."""
    get_lines = as_line_source(source)

    def merge(acc, part):
        acc[0].merge(part[0])
        acc[1].update(part[1])
        return acc

    run_report, counts = scan_chunks(
        get_lines(),
        lambda lines: _type_chunk(lines, relation),
        merge,
        (SkipReport(), Counter()),
        workers=workers,
    )
    if report is not None:
        report.merge(run_report)
    return counts


def modal_subject_type(counts: Counter) -> str | None:
    """Most frequent class id; count ties go to the smaller numeric id."""
    if not counts:
        return None
    return min(counts, key=lambda cid: (-counts[cid], entity_ordinal(cid)))


def _missing_chunk(
    lines: list[str], relation: str, subject_type: str, seed: int, n: int
) -> tuple[SkipReport, list[tuple[int, str, str]], int]:
    report = SkipReport()
    pool: list[tuple[int, str, str]] = []
    for entity in stream_entities(lines, report):
        if not is_entity_id(entity.id):
            continue
        if subject_type not in entity.instance_classes():
            continue
        if entity.holds(relation):
            continue
        label = entity.label()
        if label is None:
            report.missing_labels += 1
            continue
        pool.append(
            (pair_priority(seed, entity.id.encode(), relation.encode()), entity.id, label)
        )
    return report, heapq.nsmallest(n, pool), len(pool)


def sample_missing_facts(
    source: str | Path | Iterable[str],
    relation: str,
    subject_type: str,
    n: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    report: SkipReport | None = None,
    population: list[int] | None = None,
) -> list[tuple[EntityRef, str]]:
    """Deterministic sample of labeled subjects lacking the relation.

    Every returned subject is a direct instance of subject_type, carries a
    canonical label, and has no non-deprecated statement for the relation.
    Fewer than n results only means the eligible pool was smaller. When
    ``population`` is given, the total count of eligible subjects (before
    sampling) is appended to it: that is the full missing-pair population
    the completion estimates extrapolate over.
    """
    if n < 1:
        raise KbforgeError(f"sample size must be >= 1, got {n}")
    get_lines = as_line_source(source)

    def merge(acc, part):
        acc[0].merge(part[0])
        merged = acc[1] + part[1]
        return (acc[0], heapq.nsmallest(n, merged), acc[2] + part[2])

    run_report, picks, eligible = scan_chunks(
        get_lines(),
        lambda lines: _missing_chunk(lines, relation, subject_type, seed, n),
        merge,
        (SkipReport(), [], 0),
        workers=workers,
    )
    if report is not None:
        report.merge(run_report)
    if population is not None:
        population.append(eligible)
    picks.sort()
    return [(EntityRef(sid, label), relation) for _, sid, label in picks]
