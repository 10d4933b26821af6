"""Pipeline configuration: one key-value document shared by every stage.

Config files are plain text, one ``key = value`` per line, ``#`` comments
and blank lines ignored. Dotted keys feed per-relation tables consumed by
the report stage:

    dump = snapshot.json.gz
    relations = relations.jsonl
    out = run1/
    backend = mock:fixtures/model.tsv
    seed = 7
    accuracy.P103 = 0.82

The config hash binds every artifact to the settings that produced it; it
covers exactly the fields that can change artifact content, so moving the
output directory or changing worker counts never invalidates a run.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping

from ..core.types import KbforgeError, is_property_id


class ConfigError(KbforgeError):
    """The configuration is unusable; ``problems`` lists field-level faults."""

    def __init__(self, problems: list[str]) -> None:
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run needs, with paper-mirroring defaults."""

    dump: str = ""
    relations: str = ""
    out: str = "."
    backend: str = ""
    prompts: str = ""
    seed: int = 0
    k: int = 10
    target_precision: float = 0.90
    max_pairs: int = 100_000
    missing_sample_n: int = 10_000
    review_address: str = "127.0.0.1:8341"
    workers: int = 1
    accuracy: Mapping[str, float] = field(default_factory=dict)
    cardinality: Mapping[str, int] = field(default_factory=dict)

    def problems(self) -> list[str]:
        """Field-level validation messages; empty means usable."""
        out = []
        if not self.dump.strip():
            out.append("dump: a dump path is required")
        if not self.relations.strip():
            out.append("relations: a relation spec file is required")
        if not self.out.strip():
            out.append("out: an output directory is required")
        if self.seed < 0:
            out.append(f"seed: must be >= 0, got {self.seed}")
        if self.k < 1:
            out.append(f"k: must be >= 1, got {self.k}")
        if not 0.0 < self.target_precision <= 1.0:
            out.append(
                f"target_precision: must be in (0,1], got {self.target_precision}"
            )
        if self.max_pairs < 1:
            out.append(f"max_pairs: must be >= 1, got {self.max_pairs}")
        if self.missing_sample_n < 1:
            out.append(
                f"missing_sample_n: must be >= 1, got {self.missing_sample_n}"
            )
        if self.workers < 1:
            out.append(f"workers: must be >= 1, got {self.workers}")
        if ":" not in self.review_address:
            out.append(
                f"review_address: expected host:port, got {self.review_address!r}"
            )
        for pid, value in self.accuracy.items():
            if not 0.0 <= value <= 1.0:
                out.append(f"accuracy.{pid}: must be in [0,1], got {value}")
        for pid, value in self.cardinality.items():
            if value < 1:
                out.append(f"cardinality.{pid}: must be >= 1, got {value}")
        return out

    def config_hash(self) -> str:
        """Digest of the content-determining fields.

        Output directory, worker count, review address, and the report-only
        accuracy/cardinality tables are excluded: none of them change what
        the pipeline stages compute.
        """
        parts = [
            f"dump={self.dump}",
            f"relations={self.relations}",
            f"prompts={self.prompts}",
            f"backend={self.backend}",
            f"seed={self.seed}",
            f"k={self.k}",
            f"target_precision={self.target_precision!r}",
            f"max_pairs={self.max_pairs}",
            f"missing_sample_n={self.missing_sample_n}",
        ]
        digest = hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()
        return digest[:12]

    @property
    def provenance(self) -> dict:
        return {"config": self.config_hash(), "seed": self.seed}

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


_INT_FIELDS = {"seed", "k", "max_pairs", "missing_sample_n", "workers"}
_FLOAT_FIELDS = {"target_precision"}
_STRING_FIELDS = {
    "dump",
    "relations",
    "out",
    "backend",
    "prompts",
    "review_address",
}


def parse_config(lines, source: str = "<config>") -> PipelineConfig:
    """Parse ``key = value`` lines; raises ConfigError listing every fault."""
    values: dict = {}
    accuracy: dict[str, float] = {}
    cardinality: dict[str, int] = {}
    problems: list[str] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            problems.append(f"{source}:{line_no}: expected key = value")
            continue
        key, value = key.strip(), value.strip()
        table, dot, pid = key.partition(".")
        try:
            if dot and table == "accuracy":
                _require_pid(pid)
                accuracy[pid] = float(value)
            elif dot and table == "cardinality":
                _require_pid(pid)
                cardinality[pid] = int(value)
            elif key in _INT_FIELDS:
                values[key] = int(value)
            elif key in _FLOAT_FIELDS:
                values[key] = float(value)
            elif key in _STRING_FIELDS:
                values[key] = value
            else:
                problems.append(f"{source}:{line_no}: unknown key {key!r}")
        except (TypeError, ValueError) as exc:
            problems.append(f"{source}:{line_no}: {key}: {exc}")
    if problems:
        raise ConfigError(problems)
    return PipelineConfig(accuracy=accuracy, cardinality=cardinality, **values)


def _require_pid(pid: str) -> None:
    if not is_property_id(pid):
        raise ValueError(f"not a property id: {pid!r}")


def read_config(path: str | Path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fp:
            return parse_config(fp, source=str(path))
    except OSError as exc:
        raise ConfigError([f"config file unreadable: {exc}"]) from exc


def apply_overrides(config: PipelineConfig, **overrides) -> PipelineConfig:
    """A copy with the non-None overrides applied (flag and env values)."""
    known = {f.name for f in fields(PipelineConfig)}
    updates = {
        key: value
        for key, value in overrides.items()
        if value is not None and key in known
    }
    if not updates:
        return config
    return dataclasses.replace(config, **updates)
