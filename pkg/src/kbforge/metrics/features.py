"""Per-relation features used in the correlation diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from ..core.types import BenchmarkRecord, InvariantError, KbforgeError
from .baselines import object_distribution


@dataclass(frozen=True)
class RelationFeatures:
    entropy_normalized: float
    unique_objects: int
    single_valuedness: float
    vocab_coverage: float

    def __post_init__(self) -> None:
        for name in ("entropy_normalized", "single_valuedness", "vocab_coverage"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvariantError(f"{name} out of [0,1]: {value}")


def normalized_entropy(counts: Sequence[int]) -> float:
    """Shannon entropy (base 2) of a count distribution over log2(k).

    Defined as 0 for fewer than two outcomes; 1 for a uniform distribution.
    """
    counts = [c for c in counts if c > 0]
    k = len(counts)
    if k <= 1:
        return 0.0
    total = sum(counts)
    entropy = 0.0
    for c in counts:
        p = c / total
        entropy -= p * math.log2(p)
    value = entropy / math.log2(k)
    # log2 rounding can push an exactly uniform distribution a hair past 1
    return min(value, 1.0)


def relation_features(
    records: Sequence[BenchmarkRecord],
    in_vocab: Callable[[str], bool],
) -> RelationFeatures:
    """Entropy, object counts, single-valuedness, and vocabulary coverage."""
    counts = object_distribution(records)
    single = (
        sum(1 for rec in records if len(rec.valid_objects) == 1) / len(records)
        if records
        else 0.0
    )
    coverage = (
        sum(1 for label in counts if in_vocab(label)) / len(counts) if counts else 0.0
    )
    return RelationFeatures(
        entropy_normalized=normalized_entropy(list(counts.values())),
        unique_objects=len(counts),
        single_valuedness=single,
        vocab_coverage=coverage,
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(x) != len(y):
        raise KbforgeError("pearson: input lengths differ")
    n = len(x)
    if n < 2:
        raise KbforgeError("pearson: need at least two points")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    # sqrt before multiplying so near-subnormal variances cannot underflow
    denom = math.sqrt(var_x) * math.sqrt(var_y)
    if denom == 0.0:
        raise KbforgeError("undefined correlation: zero variance input")
    r = sum(a * b for a, b in zip(dx, dy)) / denom
    return max(-1.0, min(1.0, r))
