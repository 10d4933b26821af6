"""Distribution-based baselines: majority vote and weighted random draw.

Both assign an object label to every record from the relation's own
ground-truth object distribution, so precision and recall coincide
(every record receives exactly one assignment).
"""

from __future__ import annotations

import random
from collections import Counter
from typing import Sequence

from ..core.types import BenchmarkRecord
from .judge import AliasDictionary, judge


def object_distribution(records: Sequence[BenchmarkRecord]) -> Counter:
    """Label frequency over all valid-object occurrences of a relation."""
    counts: Counter = Counter()
    for record in records:
        counts.update(record.object_labels)
    return counts


def majority_baseline(
    records: Sequence[BenchmarkRecord],
    dictionary: AliasDictionary | None = None,
) -> tuple[float, float]:
    """Assign the most frequent object label to every record.

    Frequency ties break toward the lexicographically smallest label so
    the baseline is deterministic.
    """
    if not records:
        return 0.0, 0.0
    counts = object_distribution(records)
    majority_label = min(counts, key=lambda label: (-counts[label], label))
    n_correct = sum(judge(majority_label, rec, dictionary) for rec in records)
    fraction = n_correct / len(records)
    return fraction, fraction


def random_baseline(
    records: Sequence[BenchmarkRecord],
    seed: int,
    dictionary: AliasDictionary | None = None,
) -> tuple[float, float]:
    """Assign a label drawn from the object distribution to every record."""
    if not records:
        return 0.0, 0.0
    counts = object_distribution(records)
    labels = sorted(counts)
    weights = [counts[label] for label in labels]
    rng = random.Random(seed)
    assignments = rng.choices(labels, weights=weights, k=len(records))
    n_correct = sum(
        judge(label, rec, dictionary) for label, rec in zip(assignments, records)
    )
    fraction = n_correct / len(records)
    return fraction, fraction
