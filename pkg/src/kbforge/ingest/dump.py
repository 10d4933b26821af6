"""Streaming parser over Wikidata full-JSON dumps.

The dump is one large JSON array with one entity document per line
(lines usually ending in a comma). Parsing is strictly line-at-a-time
so memory stays bounded by the largest single entity, never the dump.
Gzip- and bzip2-compressed dumps are detected by magic bytes and
decompressed transparently.
"""

from __future__ import annotations

import bz2
import gzip
import io
import json
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from ..core.types import EntityRef, KbforgeError, Triple, is_entity_id

_ENTITY_ID = re.compile(r"^[A-Z]\d+$")

ENGLISH = "en"
INSTANCE_OF = "P31"


class DumpFormatError(KbforgeError):
    """A single dump document that cannot be interpreted."""


@dataclass
class SkipReport:
    """Counters for everything a dump pass consumed, skipped, or dropped.

    entities_parsed counts candidate documents consumed (accepted plus
    rejected), so entities_parsed == emitted + parse_errors always holds.
    Counters only ever increase.
    """

    entities_parsed: int = 0
    parse_errors: int = 0
    missing_labels: int = 0
    statements_deprecated: int = 0
    statements_nonentity: int = 0

    def merge(self, other: "SkipReport") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Statement:
    """One claim of a dump entity.

    object_id is None for anything that is not an entity-valued snak:
    literals (dates, quantities, strings) and novalue/somevalue snaks.
    """

    object_id: str | None
    rank: str = "normal"

    @property
    def deprecated(self) -> bool:
        return self.rank == "deprecated"


@dataclass(frozen=True)
class DumpEntity:
    """One parsed dump document, reduced to what extraction needs."""

    id: str
    labels: Mapping[str, str] = field(default_factory=dict)
    claims: Mapping[str, tuple[Statement, ...]] = field(default_factory=dict)

    def label(self, language: str = ENGLISH) -> str | None:
        return self.labels.get(language)

    def holds(self, pid: str) -> bool:
        """True if any non-deprecated statement exists for the property.

        Deliberately rank-based, not value-based: a literal-valued or
        valueless statement still marks the slot as occupied, so the pair
        does not qualify as a missing fact.
        """
        return any(not s.deprecated for s in self.claims.get(pid, ()))

    def instance_classes(self) -> tuple[str, ...]:
        """Direct instance-of class ids (non-deprecated, entity-valued)."""
        return tuple(
            s.object_id
            for s in self.claims.get(INSTANCE_OF, ())
            if not s.deprecated and s.object_id is not None
        )


def _parse_statement(doc: object) -> Statement:
    if not isinstance(doc, dict):
        raise DumpFormatError("statement is not an object")
    rank = doc.get("rank", "normal")
    if not isinstance(rank, str):
        raise DumpFormatError("statement rank is not a string")
    object_id = None
    snak = doc.get("mainsnak")
    if isinstance(snak, dict):
        datavalue = snak.get("datavalue")
        if isinstance(datavalue, dict) and datavalue.get("type") == "wikibase-entityid":
            value = datavalue.get("value")
            if isinstance(value, dict) and isinstance(value.get("id"), str):
                object_id = value["id"]
    return Statement(object_id=object_id, rank=rank)


def entity_from_document(doc: object) -> DumpEntity:
    """Reduce one raw dump document to a DumpEntity; raise on bad shape."""
    if not isinstance(doc, dict):
        raise DumpFormatError("document is not an object")
    entity_id = doc.get("id")
    if not isinstance(entity_id, str) or not _ENTITY_ID.match(entity_id):
        raise DumpFormatError(f"malformed document id: {entity_id!r}")

    labels: dict[str, str] = {}
    for language, label_doc in (doc.get("labels") or {}).items():
        if isinstance(label_doc, dict):
            value = label_doc.get("value")
            if isinstance(value, str) and value.strip():
                labels[language] = value

    claims: dict[str, tuple[Statement, ...]] = {}
    raw_claims = doc.get("claims") or {}
    if not isinstance(raw_claims, dict):
        raise DumpFormatError("claims is not an object")
    for pid, statements in raw_claims.items():
        if not isinstance(statements, list):
            raise DumpFormatError(f"claims[{pid!r}] is not a list")
        claims[pid] = tuple(_parse_statement(s) for s in statements)
    return DumpEntity(id=entity_id, labels=labels, claims=claims)


def stream_entities(
    lines: Iterable[str], report: SkipReport
) -> Iterator[DumpEntity]:
    """Yield entities in file order, counting malformed lines as skipped."""
    for raw in lines:
        line = raw.strip()
        if line in ("", "[", "]", ","):
            continue
        body = line.rstrip(",").rstrip()
        report.entities_parsed += 1
        try:
            entity = entity_from_document(json.loads(body))
        except (json.JSONDecodeError, DumpFormatError):
            report.parse_errors += 1
            continue
        yield entity


def open_dump(path: str | Path) -> IO[str]:
    """Open a dump as a text stream, decompressing by magic bytes."""
    path = Path(path)
    with open(path, "rb") as probe:
        magic = probe.read(3)
    if magic.startswith(b"\x1f\x8b"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    if magic.startswith(b"BZh"):
        return io.TextIOWrapper(bz2.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def extract_triples(
    entity: DumpEntity,
    relations: Iterable[str],
    report: SkipReport | None = None,
) -> list[Triple]:
    """Ground-truth triples: non-deprecated, entity-valued statements only."""
    if not is_entity_id(entity.id):
        # property and lexeme documents are never benchmark subjects
        return []
    triples = []
    for pid in sorted(set(relations)):
        for statement in entity.claims.get(pid, ()):
            if statement.deprecated:
                if report is not None:
                    report.statements_deprecated += 1
                continue
            if statement.object_id is None or not is_entity_id(statement.object_id):
                if report is not None:
                    report.statements_nonentity += 1
                continue
            triples.append(
                Triple(
                    subject=EntityRef(entity.id, entity.label()),
                    relation=pid,
                    object=EntityRef(statement.object_id),
                )
            )
    return triples
