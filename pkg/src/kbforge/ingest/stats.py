"""Dataset statistics over a built benchmark."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from ..core.formats import provenance_line
from ..core.types import BenchmarkRecord, KbforgeError
from ..metrics.baselines import object_distribution
from ..metrics.features import normalized_entropy


@dataclass(frozen=True)
class DatasetStats:
    unique_subjects: int
    unique_objects: int
    n_triples: int
    n_multi_token_objects: int
    entropy_by_relation: Mapping[str, float]

    @property
    def entropy_average(self) -> float:
        if not self.entropy_by_relation:
            return 0.0
        return sum(self.entropy_by_relation.values()) / len(self.entropy_by_relation)


def dataset_stats(
    benchmark: Mapping[str, Sequence[BenchmarkRecord]],
    in_vocab: Callable[[str], bool],
) -> DatasetStats:
    """Counts over labels; multi-token means not a single vocabulary token.

    Multi-token objects are counted per occurrence (once per triple), not
    per distinct label, matching how triples themselves are counted.
    """
    if in_vocab is None:
        raise KbforgeError("dataset_stats needs a vocabulary predicate")
    subjects: set[str] = set()
    objects: set[str] = set()
    n_triples = 0
    n_multi = 0
    entropy: dict[str, float] = {}
    for relation in sorted(benchmark):
        records = benchmark[relation]
        for record in records:
            subjects.add(record.subject.id)
            for obj in record.valid_objects:
                objects.add(obj.id)
                n_triples += 1
                if not in_vocab(obj.label):
                    n_multi += 1
        entropy[relation] = normalized_entropy(
            list(object_distribution(records).values())
        )
    return DatasetStats(
        unique_subjects=len(subjects),
        unique_objects=len(objects),
        n_triples=n_triples,
        n_multi_token_objects=n_multi,
        entropy_by_relation=entropy,
    )


def format_stats(stats: DatasetStats, provenance: dict | None = None) -> str:
    """Render the stats report as a stable, diff-friendly text document."""
    lines = ["#kbforge-stats v1"]
    if provenance is not None:
        lines.append(provenance_line(provenance["config"], provenance["seed"]))
    lines += [
        f"unique_subjects {stats.unique_subjects}",
        f"unique_objects {stats.unique_objects}",
        f"n_triples {stats.n_triples}",
        f"n_multi_token_objects {stats.n_multi_token_objects}",
        f"entropy_average {stats.entropy_average:.4f}",
    ]
    for relation in sorted(stats.entropy_by_relation):
        lines.append(
            f"entropy {relation} {stats.entropy_by_relation[relation]:.4f}"
        )
    return "\n".join(lines) + "\n"
