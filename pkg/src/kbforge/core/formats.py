"""Versioned line-delimited file formats.

Every toolkit artifact is UTF-8 text: a ``#kbforge-format v1`` header,
an optional ``#run ...`` provenance line (config hash + seed), then one
compact JSON object per line. Comment lines start with ``#`` and are
ignored by parsers. Serialization is canonical (sorted keys, fixed
separators) so identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator

from .types import (
    BenchmarkRecord,
    EntityRef,
    KbforgeError,
    Prediction,
    PredictionSet,
    RelationSpec,
    ScoredFactCandidate,
)

FORMAT_HEADER = "#kbforge-format v1"
_RUN_PREFIX = "#run "


class FormatError(KbforgeError):
    """Malformed artifact file; message carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def provenance_line(config_hash: str, seed: int) -> str:
    return f"{_RUN_PREFIX}config={config_hash} seed={seed}"


def parse_provenance(line: str) -> dict | None:
    """Decode a ``#run`` header line; None when it is not one."""
    if not line.startswith(_RUN_PREFIX):
        return None
    fields = {}
    for token in line[len(_RUN_PREFIX):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    if "seed" in fields:
        fields["seed"] = int(fields["seed"])
    return fields


def dump_jsonl(payloads: Iterable[dict], provenance: dict | None = None) -> str:
    """Serialize payload dicts into the versioned line format."""
    lines = [FORMAT_HEADER]
    if provenance is not None:
        lines.append(provenance_line(provenance["config"], provenance["seed"]))
    lines.extend(json_line(p) for p in payloads)
    return "\n".join(lines) + "\n"


def iter_jsonl(lines: Iterable[str]) -> Iterator[tuple[int, dict]]:
    """Yield (line_no, payload) pairs, checking the version header.

    Completely empty input is allowed and yields nothing; any content must
    start with the format header.
    """
    header_seen = False
    for line_no, raw in enumerate(lines, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if not header_seen:
            if line != FORMAT_HEADER:
                raise FormatError(
                    f"missing {FORMAT_HEADER!r} header, got {line[:60]!r}", line_no
                )
            header_seen = True
            continue
        if line.startswith("#"):
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", line_no) from exc
        if not isinstance(payload, dict):
            raise FormatError("payload is not an object", line_no)
        yield line_no, payload


def read_provenance(path: str | Path) -> dict | None:
    """Provenance recorded in an artifact's header, if any.

    Scans the leading comment lines only, so it works on every text
    artifact regardless of which versioned header it carries.
    """
    with open(path, encoding="utf-8") as fp:
        for raw in fp:
            line = raw.strip()
            if not line:
                continue
            if not line.startswith("#"):
                return None
            found = parse_provenance(line)
            if found is not None:
                return found
    return None


def write_text(path: str | Path, content: str) -> None:
    Path(path).write_text(content, encoding="utf-8", newline="\n")


# -- benchmark files ---------------------------------------------------------


def serialize_benchmark(
    records: Iterable[BenchmarkRecord], provenance: dict | None = None
) -> str:
    """Line-delimited benchmark serialization; inverse of parse_benchmark."""
    payloads = (
        {
            "subject_id": rec.subject.id,
            "subject_label": rec.subject.label,
            "relation_id": rec.relation,
            "objects": [{"id": o.id, "label": o.label} for o in rec.valid_objects],
        }
        for rec in records
    )
    return dump_jsonl(payloads, provenance)


def parse_benchmark(lines: Iterable[str]) -> list[BenchmarkRecord]:
    """Parse a benchmark file, rejecting malformed lines and duplicate pairs."""
    records = []
    seen_keys: set[tuple[str, str]] = set()
    for line_no, payload in iter_jsonl(lines):
        try:
            record = BenchmarkRecord(
                subject=EntityRef(payload["subject_id"], payload["subject_label"]),
                relation=payload["relation_id"],
                valid_objects=tuple(
                    EntityRef(o["id"], o["label"]) for o in payload["objects"]
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"invalid benchmark record: {exc}", line_no) from exc
        if record.key in seen_keys:
            raise FormatError(f"duplicate subject-relation pair {record.key}", line_no)
        seen_keys.add(record.key)
        records.append(record)
    return records


def write_benchmark(
    records: Iterable[BenchmarkRecord],
    path: str | Path,
    provenance: dict | None = None,
) -> None:
    write_text(path, serialize_benchmark(records, provenance))


def read_benchmark(path: str | Path) -> list[BenchmarkRecord]:
    with open(path, encoding="utf-8") as fp:
        return parse_benchmark(fp)


# -- relation spec files -----------------------------------------------------


def serialize_relation_specs(
    specs: Iterable[RelationSpec], provenance: dict | None = None
) -> str:
    payloads = []
    for spec in specs:
        payload = {
            "pid": spec.pid,
            "name": spec.name,
            "template": spec.template,
        }
        if spec.subject_type is not None:
            payload["subject_type"] = {
                "id": spec.subject_type.id,
                "label": spec.subject_type.label,
            }
        if spec.dictionary_id is not None:
            payload["dictionary_id"] = spec.dictionary_id
        payloads.append(payload)
    return dump_jsonl(payloads, provenance)


def parse_relation_specs(lines: Iterable[str]) -> list[RelationSpec]:
    specs = []
    seen_pids: set[str] = set()
    for line_no, payload in iter_jsonl(lines):
        subject_type = None
        raw_type = payload.get("subject_type")
        if raw_type is not None:
            subject_type = EntityRef(raw_type["id"], raw_type.get("label"))
        try:
            spec = RelationSpec(
                pid=payload["pid"],
                name=payload["name"],
                template=payload["template"],
                subject_type=subject_type,
                dictionary_id=payload.get("dictionary_id"),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"invalid relation spec: {exc}", line_no) from exc
        if spec.pid in seen_pids:
            raise FormatError(f"duplicate relation {spec.pid}", line_no)
        seen_pids.add(spec.pid)
        specs.append(spec)
    return specs


def read_relation_specs(path: str | Path) -> list[RelationSpec]:
    with open(path, encoding="utf-8") as fp:
        return parse_relation_specs(fp)


def write_relation_specs(
    specs: Iterable[RelationSpec], path: str | Path, provenance: dict | None = None
) -> None:
    write_text(path, serialize_relation_specs(specs, provenance))


# -- prediction set files ------------------------------------------------------


def serialize_prediction_sets(
    sets: Iterable[PredictionSet], provenance: dict | None = None
) -> str:
    """Ranks are implicit in list order; error annotations survive round trips."""
    payloads = []
    for pset in sets:
        payload: dict = {
            "subject_id": pset.record_key[0],
            "relation_id": pset.record_key[1],
            "predictions": [
                {"token": p.token, "probability": p.probability}
                for p in pset.predictions
            ],
        }
        if pset.error is not None:
            payload["error"] = pset.error
        payloads.append(payload)
    return dump_jsonl(payloads, provenance)


def parse_prediction_sets(lines: Iterable[str]) -> list[PredictionSet]:
    sets = []
    for line_no, payload in iter_jsonl(lines):
        try:
            predictions = tuple(
                Prediction(item["token"], item["probability"], rank)
                for rank, item in enumerate(payload["predictions"], 1)
            )
            pset = PredictionSet(
                record_key=(payload["subject_id"], payload["relation_id"]),
                predictions=predictions,
                error=payload.get("error"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"invalid prediction set: {exc}", line_no) from exc
        sets.append(pset)
    return sets


def write_prediction_sets(
    sets: Iterable[PredictionSet], path: str | Path, provenance: dict | None = None
) -> None:
    write_text(path, serialize_prediction_sets(sets, provenance))


def read_prediction_sets(path: str | Path) -> list[PredictionSet]:
    with open(path, encoding="utf-8") as fp:
        return parse_prediction_sets(fp)


# -- fact candidate files ------------------------------------------------------


def serialize_candidates(
    candidates: Iterable[ScoredFactCandidate], provenance: dict | None = None
) -> str:
    payloads = (
        {
            "subject_id": c.subject.id,
            "subject_label": c.subject.label,
            "relation_id": c.relation,
            "predicted_object": c.predicted_object,
            "probability": c.probability,
        }
        for c in candidates
    )
    return dump_jsonl(payloads, provenance)


def parse_candidates(lines: Iterable[str]) -> list[ScoredFactCandidate]:
    candidates = []
    for line_no, payload in iter_jsonl(lines):
        try:
            candidate = ScoredFactCandidate(
                subject=EntityRef(payload["subject_id"], payload["subject_label"]),
                relation=payload["relation_id"],
                predicted_object=payload["predicted_object"],
                probability=payload["probability"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"invalid fact candidate: {exc}", line_no) from exc
        candidates.append(candidate)
    return candidates


def write_candidates(
    candidates: Iterable[ScoredFactCandidate],
    path: str | Path,
    provenance: dict | None = None,
) -> None:
    write_text(path, serialize_candidates(candidates, provenance))


def read_candidates(path: str | Path) -> list[ScoredFactCandidate]:
    with open(path, encoding="utf-8") as fp:
        return parse_candidates(fp)
