"""Judging, R@P computation, baselines, features, and reports."""

from .baselines import majority_baseline, object_distribution, random_baseline
from .features import RelationFeatures, normalized_entropy, pearson, relation_features
from .judge import AliasDictionary, DictionaryError, judge, normalize, parse_dictionary, read_dictionary
from .ranking import JudgedPrediction, judge_prediction_sets, recall_at_precision
from .report import (
    aggregate_table,
    build_relation_report,
    parse_reports,
    report_payload,
    serialize_reports,
)

__all__ = [
    "AliasDictionary",
    "DictionaryError",
    "JudgedPrediction",
    "RelationFeatures",
    "aggregate_table",
    "build_relation_report",
    "judge",
    "judge_prediction_sets",
    "majority_baseline",
    "normalize",
    "normalized_entropy",
    "object_distribution",
    "parse_dictionary",
    "parse_reports",
    "pearson",
    "random_baseline",
    "read_dictionary",
    "recall_at_precision",
    "relation_features",
    "report_payload",
    "serialize_reports",
]
