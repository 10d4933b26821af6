"""Recall at a precision target over ranked top-1 predictions.

Predictions are sorted by descending probability with correctness-blind
tie-breaking (record key order), then cut at the largest prefix whose
precision still meets the target. The probability at the cut becomes the
relation's completion threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .._kernels import prefix_cut
from ..core.types import (
    BenchmarkRecord,
    InvariantError,
    KbforgeError,
    Prediction,
    PredictionSet,
)
from .judge import AliasDictionary, judge


@dataclass(frozen=True)
class JudgedPrediction:
    """Top-1 prediction for one record, marked correct or not.

    ``top_prediction`` is None for records whose prediction set came back
    empty; they stay in the recall denominator as an unrankable tail.
    """

    record_key: tuple[str, str]
    top_prediction: Prediction | None
    correct: bool

    def __post_init__(self) -> None:
        if self.correct and self.top_prediction is None:
            raise InvariantError("a record without a prediction cannot be correct")


def judge_prediction_sets(
    prediction_sets: Iterable[PredictionSet],
    records_by_key: Mapping[tuple[str, str], BenchmarkRecord],
    dictionary: AliasDictionary | None = None,
) -> list[JudgedPrediction]:
    """Judge each set's top-1 against its record's valid objects."""
    judged = []
    for pset in prediction_sets:
        record = records_by_key.get(tuple(pset.record_key))
        if record is None:
            raise KbforgeError(f"no benchmark record for key {pset.record_key}")
        top = pset.top
        correct = top is not None and judge(top.token, record, dictionary)
        judged.append(JudgedPrediction(tuple(pset.record_key), top, correct))
    return judged


def recall_at_precision(
    judged: list[JudgedPrediction],
    target_p: float = 0.90,
    first_dip: bool = False,
) -> tuple[float, float | None]:
    """(recall, threshold probability) at the given precision target.

    The default reading takes the largest qualifying prefix even if
    precision dips below target inside it; ``first_dip`` stops at the
    first prefix that falls below target instead.
    """
    if not 0.0 < target_p <= 1.0:
        raise KbforgeError(f"target precision out of (0,1]: {target_p}")
    if not judged:
        return 0.0, None

    rankable = sorted(
        (j for j in judged if j.top_prediction is not None),
        key=lambda j: (-j.top_prediction.probability, j.record_key),
    )
    flags = bytes(1 if j.correct else 0 for j in rankable)
    best_len, best_correct = prefix_cut(flags, target_p, first_dip)
    if best_len == 0:
        return 0.0, None
    recall = best_correct / len(judged)
    threshold = rankable[best_len - 1].top_prediction.probability
    return recall, threshold
