"""Matching predicted surface strings against multi-valued ground truth.

A prediction is correct when it is among the record's valid object labels,
or when an alias dictionary places it in the same surface-form group as one
of them (e.g. "French" for "France"). All comparison normalization happens
here, nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..core.types import BenchmarkRecord, KbforgeError


class DictionaryError(KbforgeError):
    """Alias dictionary failed to load (overlapping groups, empty group)."""


def normalize(text: str) -> str:
    """Canonical matching form: trim, case-fold, collapse inner whitespace."""
    return " ".join(text.split()).casefold()


@dataclass(frozen=True)
class AliasDictionary:
    """Equivalence classes of surface forms, normalized and disjoint."""

    dictionary_id: str
    groups: tuple[frozenset[str], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for group in self.groups:
            overlap = seen & group
            if overlap:
                raise DictionaryError(
                    f"{self.dictionary_id}: surface forms in multiple groups: "
                    f"{sorted(overlap)}"
                )
            seen.update(group)

    def group_of(self, surface: str) -> frozenset[str] | None:
        normalized = normalize(surface)
        for group in self.groups:
            if normalized in group:
                return group
        return None

    def same_group(self, a: str, b: str) -> bool:
        group = self.group_of(a)
        return group is not None and normalize(b) in group


def parse_dictionary(lines: Iterable[str], dictionary_id: str) -> AliasDictionary:
    """Parse `form|form|form` lines into an alias dictionary."""
    groups = []
    for line_no, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        members = frozenset(
            normalize(part) for part in line.split("|") if part.strip()
        )
        if not members:
            raise DictionaryError(f"{dictionary_id}: empty group at line {line_no}")
        groups.append(members)
    return AliasDictionary(dictionary_id, tuple(groups))


def read_dictionary(path: str | Path) -> AliasDictionary:
    path = Path(path)
    with open(path, encoding="utf-8") as fp:
        return parse_dictionary(fp, path.stem)


def judge(
    prediction_token: str,
    record: BenchmarkRecord,
    dictionary: AliasDictionary | None = None,
) -> bool:
    """True iff the token matches any valid object of the record."""
    token = normalize(prediction_token)
    for label in record.object_labels:
        gold = normalize(label)
        if token == gold:
            return True
        if dictionary is not None and dictionary.same_group(token, gold):
            return True
    return False
