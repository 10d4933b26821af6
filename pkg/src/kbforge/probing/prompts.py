"""Cloze prompt construction from relation templates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..core.types import (
    OBJECT_PLACEHOLDER,
    SUBJECT_PLACEHOLDER,
    BenchmarkRecord,
    InvariantError,
    KbforgeError,
    RelationSpec,
    validate_relation_spec,
)

MASK = "[MASK]"


@dataclass(frozen=True)
class ClozeQuery:
    """A fully instantiated prompt with exactly one masked position."""

    prompt: str
    record_key: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        n_masks = self.prompt.count(MASK)
        if n_masks != 1:
            raise InvariantError(
                f"prompt must contain exactly one {MASK}, found {n_masks}: "
                f"{self.prompt!r}"
            )
        for placeholder in (SUBJECT_PLACEHOLDER, OBJECT_PLACEHOLDER):
            if placeholder in self.prompt:
                raise InvariantError(
                    f"residual {placeholder} placeholder in prompt: {self.prompt!r}"
                )


def render_prompt(template: str, subject_label: str) -> str:
    """Fill a template: object slot becomes the mask, subject slot the label.

    The object slot is replaced first so a pathological label containing
    a placeholder string trips the ClozeQuery invariants instead of
    silently producing a second mask.
    """
    return template.replace(OBJECT_PLACEHOLDER, MASK).replace(
        SUBJECT_PLACEHOLDER, subject_label
    )


def instantiate_prompt(
    spec: RelationSpec,
    subject_label: str,
    record_key: tuple[str, str] | None = None,
) -> ClozeQuery:
    """Build the cloze query for one subject under a validated spec."""
    problems = validate_relation_spec(spec)
    if problems:
        raise KbforgeError(f"invalid spec {spec.pid}: " + "; ".join(problems))
    if not subject_label or not subject_label.strip():
        raise KbforgeError(f"empty subject label for {spec.pid}")
    return ClozeQuery(render_prompt(spec.template, subject_label), record_key)


def queries_for_records(
    records: Iterable[BenchmarkRecord],
    specs_by_pid: Mapping[str, RelationSpec],
) -> list[ClozeQuery]:
    """One query per record, keyed like the record; unknown relation fails."""
    queries = []
    for record in records:
        spec = specs_by_pid.get(record.relation)
        if spec is None:
            raise KbforgeError(f"no relation spec for {record.relation}")
        queries.append(
            instantiate_prompt(spec, record.subject.label, record.key)
        )
    return queries


def specs_by_pid(specs: Sequence[RelationSpec]) -> dict[str, RelationSpec]:
    return {spec.pid: spec for spec in specs}
