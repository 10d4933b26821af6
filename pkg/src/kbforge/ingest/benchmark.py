"""Benchmark construction: deterministic pair sampling over a dump.

Sampling keys every (subject, relation) pair with a seed-stable hash and
keeps the max_pairs smallest keys, so the sample is a pure function of
(dump content, seed, cap): chunk order, worker count, and rerun all yield
byte-identical benchmarks.

Two passes are required because object labels live on other dump lines:
pass 1 collects sampled candidate pairs (with an oversampling margin),
pass 2 resolves object labels for just the candidate objects. Candidates
whose objects cannot all be labeled are dropped; if drops eat into the
cap while unexamined pairs remain, the margin doubles and the scan
repeats, so the cap-exactness contract survives adversarial dumps.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .._kernels import pair_priority
from ..core.types import (
    BenchmarkRecord,
    EntityRef,
    KbforgeError,
    RelationSpec,
    entity_ordinal,
    is_entity_id,
    validate_relation_spec,
)
from ._scan import as_line_source, scan_chunks
from .dump import SkipReport, extract_triples, stream_entities

DEFAULT_MAX_PAIRS = 100_000

# oversampling margin: sampled-but-droppable candidates kept per relation
# beyond the cap before a rescan with a doubled margin becomes necessary
_MARGIN_FLOOR = 64


@dataclass(frozen=True)
class _Candidate:
    priority: int
    subject_id: str
    subject_label: str
    object_ids: tuple[str, ...]

    @property
    def sort_key(self) -> tuple:
        return (self.priority, self.subject_id, self.subject_label, self.object_ids)


@dataclass
class _Pass1:
    report: SkipReport
    candidates: dict[str, list[_Candidate]]
    total_pairs: Counter

    @staticmethod
    def empty(pids: Sequence[str]) -> "_Pass1":
        return _Pass1(SkipReport(), {pid: [] for pid in pids}, Counter())


def check_specs(specs: Sequence[RelationSpec]) -> list[str]:
    """All relation specs valid and pairwise distinct; error strings if not."""
    problems = []
    seen: set[str] = set()
    for spec in specs:
        for problem in validate_relation_spec(spec):
            problems.append(f"{spec.pid}: {problem}")
        if spec.pid in seen:
            problems.append(f"duplicate relation {spec.pid}")
        seen.add(spec.pid)
    return problems


def _pass1_chunk(lines: list[str], pids: Sequence[str], seed: int, keep: int) -> _Pass1:
    partial = _Pass1.empty(pids)
    pid_set = set(pids)
    for entity in stream_entities(lines, partial.report):
        if not is_entity_id(entity.id):
            continue
        triples = extract_triples(entity, pid_set, partial.report)
        if not triples:
            continue
        grouped: dict[str, list[str]] = {}
        for triple in triples:
            objects = grouped.setdefault(triple.relation, [])
            if triple.object.id not in objects:
                objects.append(triple.object.id)
        label = entity.label()
        for pid, object_ids in grouped.items():
            if label is None:
                partial.report.missing_labels += 1
                continue
            partial.total_pairs[pid] += 1
            partial.candidates[pid].append(
                _Candidate(
                    priority=pair_priority(seed, entity.id.encode(), pid.encode()),
                    subject_id=entity.id,
                    subject_label=label,
                    object_ids=tuple(object_ids),
                )
            )
    _trim(partial.candidates, keep)
    return partial


def _trim(candidates: dict[str, list[_Candidate]], keep: int) -> None:
    for pid, items in candidates.items():
        if len(items) > keep:
            candidates[pid] = heapq.nsmallest(keep, items, key=lambda c: c.sort_key)


def _merge_pass1(acc: _Pass1, part: _Pass1, keep: int) -> _Pass1:
    acc.report.merge(part.report)
    acc.total_pairs.update(part.total_pairs)
    for pid, items in part.candidates.items():
        acc.candidates[pid].extend(items)
    _trim(acc.candidates, keep)
    return acc


def _pass2_chunk(lines: list[str], needed: frozenset[str]) -> dict[str, str]:
    labels: dict[str, str] = {}
    throwaway = SkipReport()  # pass 1 already counted these lines
    for entity in stream_entities(lines, throwaway):
        if entity.id in needed:
            label = entity.label()
            if label is not None:
                labels[entity.id] = label
    return labels


def resolve_labels(
    source: str | Path | Iterable[str],
    entity_ids: Iterable[str],
    workers: int = 1,
) -> dict[str, str]:
    """Map entity ids to their canonical labels found in the dump."""
    needed = frozenset(entity_ids)
    if not needed:
        return {}
    get_lines = as_line_source(source)

    def merge(acc: dict[str, str], part: dict[str, str]) -> dict[str, str]:
        acc.update(part)
        return acc

    return scan_chunks(
        get_lines(),
        lambda lines: _pass2_chunk(lines, needed),
        merge,
        {},
        workers=workers,
    )


def build_benchmark(
    source: str | Path | Iterable[str],
    specs: Sequence[RelationSpec],
    max_pairs: int = DEFAULT_MAX_PAIRS,
    seed: int = 0,
    workers: int = 1,
    report: SkipReport | None = None,
    totals: dict[str, int] | None = None,
) -> dict[str, list[BenchmarkRecord]]:
    """Sample up to max_pairs labeled records per relation from the dump.

    When ``totals`` is given it receives the uncapped labeled-pair count
    per relation, the snapshot cardinality that completion estimates
    divide by.
    """
    if max_pairs < 1:
        raise KbforgeError(f"max_pairs must be >= 1, got {max_pairs}")
    problems = check_specs(specs)
    if problems:
        raise KbforgeError("bad relation specs: " + "; ".join(problems))

    get_lines = as_line_source(source)
    pids = [spec.pid for spec in specs]
    keep = max_pairs + max(_MARGIN_FLOOR, max_pairs)

    while True:
        attempt_report, benchmark, exhausted, pair_counts = _attempt(
            get_lines, pids, max_pairs, seed, workers, keep
        )
        if exhausted:
            break
        keep *= 2

    if report is not None:
        report.merge(attempt_report)
    if totals is not None:
        totals.update(pair_counts)
    return benchmark


def _attempt(
    get_lines,
    pids: Sequence[str],
    max_pairs: int,
    seed: int,
    workers: int,
    keep: int,
) -> tuple[SkipReport, dict[str, list[BenchmarkRecord]], bool, dict[str, int]]:
    pass1 = scan_chunks(
        get_lines(),
        lambda lines: _pass1_chunk(lines, pids, seed, keep),
        lambda acc, part: _merge_pass1(acc, part, keep),
        _Pass1.empty(pids),
        workers=workers,
    )

    needed = {
        oid
        for items in pass1.candidates.values()
        for candidate in items
        for oid in candidate.object_ids
    }
    labels = resolve_labels(get_lines(), needed, workers=workers)

    benchmark: dict[str, list[BenchmarkRecord]] = {}
    for pid in pids:
        ordered = sorted(pass1.candidates[pid], key=lambda c: c.sort_key)
        survivors: list[_Candidate] = []
        for candidate in ordered:
            if len(survivors) >= max_pairs:
                break
            if all(oid in labels for oid in candidate.object_ids):
                survivors.append(candidate)
            else:
                pass1.report.missing_labels += 1
        if len(survivors) < max_pairs and len(ordered) < pass1.total_pairs[pid]:
            # the margin was consumed by label drops while unexamined pairs
            # remain; a wider rescan is required for cap exactness
            return pass1.report, {}, False, {}
        survivors.sort(key=lambda c: entity_ordinal(c.subject_id))
        benchmark[pid] = [
            BenchmarkRecord(
                subject=EntityRef(c.subject_id, c.subject_label),
                relation=pid,
                valid_objects=tuple(
                    EntityRef(oid, labels[oid]) for oid in c.object_ids
                ),
            )
            for c in survivors
        ]
    return pass1.report, benchmark, True, dict(pass1.total_pairs)
