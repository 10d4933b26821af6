"""Streaming dump parsing, benchmark sampling, and subject pools."""

from .benchmark import DEFAULT_MAX_PAIRS, build_benchmark, check_specs, resolve_labels
from .dump import (
    DumpEntity,
    DumpFormatError,
    SkipReport,
    Statement,
    entity_from_document,
    extract_triples,
    open_dump,
    stream_entities,
)
from .stats import DatasetStats, dataset_stats, format_stats
from .subjects import modal_subject_type, sample_missing_facts, subject_type_counts

__all__ = [
    "DEFAULT_MAX_PAIRS",
    "DatasetStats",
    "DumpEntity",
    "DumpFormatError",
    "SkipReport",
    "Statement",
    "build_benchmark",
    "check_specs",
    "dataset_stats",
    "entity_from_document",
    "extract_triples",
    "format_stats",
    "modal_subject_type",
    "open_dump",
    "resolve_labels",
    "sample_missing_facts",
    "stream_entities",
    "subject_type_counts",
]
