"""Pipeline subcommands: the batch entry point for paper-style runs.

Every stage reads the shared config, writes versioned artifacts into the
output directory, and stamps them with the config hash and seed. A stage
refuses inputs carrying a different config hash unless --force is given,
so a half-updated pipeline cannot silently mix runs.

Exit codes: 0 ok, 1 validation, 2 transport, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from contextlib import contextmanager
from pathlib import Path

from ..completion.candidates import (
    candidates_from_predictions,
    sample_for_review,
    stubs_from_pairs,
)
from ..completion.estimate import estimate_completion, format_estimates
from ..completion.thresholds import (
    calibrate,
    filter_high_accuracy,
    parse_profiles,
    serialize_profiles,
)
from ..core.formats import (
    FormatError,
    iter_jsonl,
    dump_jsonl,
    provenance_line,
    read_benchmark,
    read_prediction_sets,
    read_provenance,
    read_relation_specs,
    write_benchmark,
    write_candidates,
    write_prediction_sets,
    write_text,
)
from ..core.types import (
    KbforgeError,
    RelationSpec,
    entity_ordinal,
    validate_relation_spec,
)
from ..ingest.benchmark import build_benchmark
from ..ingest.dump import SkipReport
from ..ingest.stats import dataset_stats, format_stats
from ..ingest.subjects import (
    modal_subject_type,
    sample_missing_facts,
    subject_type_counts,
)
from ..metrics.judge import read_dictionary
from ..metrics.ranking import judge_prediction_sets
from ..metrics.baselines import majority_baseline, random_baseline
from ..metrics.features import relation_features
from ..metrics.report import (
    aggregate_table,
    build_relation_report,
    parse_reports,
    serialize_reports,
)
from ..probing.client import BackendClient, TransportError, probe_batch
from ..probing.mock import MockBackendServer, read_mock_model
from ..review.service import ReviewServer
from ..review.store import ReviewError, ReviewStore, task_to_payload
from .config import ConfigError, PipelineConfig, apply_overrides, read_config

REVIEW_SAMPLE_N = 50

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_TRANSPORT = 2
EXIT_DATA = 3


class DataError(KbforgeError):
    """Missing, stale, or unreadable pipeline data; exits with code 3."""


# artifact file names and the subcommand that produces each
_ARTIFACTS = {
    "benchmark": ("benchmark.jsonl", "build-benchmark"),
    "benchmark_meta": ("benchmark_meta.json", "build-benchmark"),
    "stats": ("stats.txt", "stats"),
    "predictions": ("predictions.jsonl", "probe"),
    "reports": ("reports.jsonl", "evaluate"),
    "report_table": ("report_table.txt", "evaluate"),
    "thresholds": ("thresholds.jsonl", "calibrate"),
    "candidates": ("candidates.jsonl", "gen-candidates"),
    "retained": ("retained.jsonl", "gen-candidates"),
    "review_tasks": ("review_tasks.jsonl", "gen-candidates"),
    "missing_meta": ("missing_meta.json", "gen-candidates"),
    "estimates": ("estimates.jsonl", "report"),
    "estimates_table": ("estimates_table.txt", "report"),
}


def artifact_path(config: PipelineConfig, name: str) -> Path:
    filename, _ = _ARTIFACTS[name]
    return config.out_dir / filename


def _require_artifact(config: PipelineConfig, name: str, force: bool) -> Path:
    """Path to an upstream artifact, verified to belong to this config."""
    path = artifact_path(config, name)
    filename, producer = _ARTIFACTS[name]
    if not path.exists():
        raise DataError(
            f"missing {filename}: run `kbforge {producer}` first"
        )
    if path.suffix == ".json":
        stamped = _read_json(path).get("config")
    else:
        found = read_provenance(path)
        stamped = None if found is None else found.get("config")
    current = config.config_hash()
    if stamped is not None and stamped != current and not force:
        raise DataError(
            f"{filename} was produced with config {stamped}, current config "
            f"is {current}; rerun `kbforge {producer}` or pass --force"
        )
    return path


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fp:
            return json.load(fp)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable {path.name}: {exc}") from exc


def _write_json(path: Path, document: dict) -> None:
    write_text(path, json.dumps(document, sort_keys=True, indent=2) + "\n")


def load_specs(config: PipelineConfig) -> list[RelationSpec]:
    """Relation specs from the config, with prompt-file template overrides."""
    try:
        specs = read_relation_specs(config.relations)
    except OSError as exc:
        raise DataError(f"relations file unreadable: {exc}") from exc
    if config.prompts:
        overrides = _read_prompt_overrides(config.prompts)
        by_pid = {spec.pid: spec for spec in specs}
        for pid, template in overrides.items():
            if pid not in by_pid:
                raise DataError(
                    f"prompt override for unknown relation {pid} "
                    f"(not in {config.relations})"
                )
            by_pid[pid] = RelationSpec(
                pid=pid,
                name=by_pid[pid].name,
                template=template,
                subject_type=by_pid[pid].subject_type,
                dictionary_id=by_pid[pid].dictionary_id,
            )
        specs = [by_pid[spec.pid] for spec in specs]
    problems = []
    for spec in specs:
        problems += [f"{spec.pid}: {p}" for p in validate_relation_spec(spec)]
    if problems:
        raise DataError("bad relation specs: " + "; ".join(problems))
    return specs


def _read_prompt_overrides(path: str) -> dict[str, str]:
    """Externally produced prompts: JSONL of {pid, template}."""
    try:
        with open(path, encoding="utf-8") as fp:
            lines = fp.readlines()
    except OSError as exc:
        raise DataError(f"prompts file unreadable: {exc}") from exc
    overrides = {}
    for line_no, payload in iter_jsonl(lines):
        try:
            overrides[payload["pid"]] = payload["template"]
        except KeyError as exc:
            raise FormatError(f"prompt override needs {exc}", line_no) from exc
    return overrides


@contextmanager
def open_backend(config: PipelineConfig):
    """Yield a client for the configured endpoint.

    ``KBFORGE_BACKEND`` overrides the config; a ``mock:<fixture>`` value
    spins up the in-process mock backend for the duration of the stage.
    """
    endpoint = os.environ.get("KBFORGE_BACKEND", "").strip() or config.backend
    if not endpoint.strip():
        raise ConfigError(
            ["backend: no endpoint configured (set backend= or KBFORGE_BACKEND)"]
        )
    if endpoint.startswith("mock:"):
        model = read_mock_model(endpoint[len("mock:"):])
        with MockBackendServer(model) as server:
            yield BackendClient(server.url)
    else:
        yield BackendClient(endpoint)


def _pid_order(pid: str) -> int:
    return entity_ordinal(pid)


def _dictionary_for(config: PipelineConfig, spec: RelationSpec):
    """Alias dictionary named by the spec, next to the relations file."""
    if spec.dictionary_id is None:
        return None
    path = Path(config.relations).parent / f"{spec.dictionary_id}.dict"
    if not path.exists():
        raise DataError(
            f"{spec.pid}: dictionary {spec.dictionary_id!r} not found at {path}"
        )
    return read_dictionary(path)


def cmd_build_benchmark(config: PipelineConfig, args) -> int:
    specs = load_specs(config)
    if not Path(config.dump).exists():
        raise DataError(f"dump not found: {config.dump}")
    report = SkipReport()
    totals: dict[str, int] = {}
    benchmark = build_benchmark(
        config.dump,
        specs,
        max_pairs=config.max_pairs,
        seed=config.seed,
        workers=config.workers,
        report=report,
        totals=totals,
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    records = [
        record
        for pid in sorted(benchmark, key=_pid_order)
        for record in benchmark[pid]
    ]
    write_benchmark(records, artifact_path(config, "benchmark"), config.provenance)
    meta = dict(config.provenance)
    meta["relations"] = {
        pid: {"total_pairs": totals.get(pid, 0), "records": len(benchmark[pid])}
        for pid in benchmark
    }
    meta["skip_report"] = report.as_dict()
    _write_json(artifact_path(config, "benchmark_meta"), meta)
    for key, value in sorted(report.as_dict().items()):
        print(f"skip {key}={value}", file=sys.stderr)
    print(
        f"wrote {len(records)} records over {len(benchmark)} relations "
        f"to {artifact_path(config, 'benchmark')}"
    )
    return EXIT_OK


def cmd_stats(config: PipelineConfig, args) -> int:
    records = read_benchmark(_require_artifact(config, "benchmark", args.force))
    by_relation: dict[str, list] = {}
    for record in records:
        by_relation.setdefault(record.relation, []).append(record)
    with open_backend(config) as client:
        stats = dataset_stats(by_relation, client.in_vocab)
    write_text(
        artifact_path(config, "stats"), format_stats(stats, config.provenance)
    )
    print(f"wrote {artifact_path(config, 'stats')}")
    return EXIT_OK


def cmd_probe(config: PipelineConfig, args) -> int:
    records = read_benchmark(_require_artifact(config, "benchmark", args.force))
    specs = load_specs(config)
    with open_backend(config) as client:
        descriptor = client.descriptor()
        if descriptor.max_k < config.k:
            raise ConfigError(
                [f"k: backend serves at most {descriptor.max_k}, requested {config.k}"]
            )
        sets = probe_batch(records, specs, client, k=config.k)
    write_prediction_sets(
        sets, artifact_path(config, "predictions"), config.provenance
    )
    failed = sum(1 for s in sets if s.error is not None)
    print(
        f"probed {len(sets)} records ({failed} failed) "
        f"to {artifact_path(config, 'predictions')}"
    )
    return EXIT_OK


def cmd_evaluate(config: PipelineConfig, args) -> int:
    records = read_benchmark(_require_artifact(config, "benchmark", args.force))
    sets = read_prediction_sets(_require_artifact(config, "predictions", args.force))
    specs = load_specs(config)
    by_pid = {spec.pid: spec for spec in specs}

    records_by_relation: dict[str, list] = {}
    for record in records:
        records_by_relation.setdefault(record.relation, []).append(record)
    sets_by_relation: dict[str, list] = {}
    for pset in sets:
        sets_by_relation.setdefault(pset.record_key[1], []).append(pset)

    reports = []
    with open_backend(config) as client:
        for pid in sorted(records_by_relation, key=_pid_order):
            spec = by_pid.get(pid)
            if spec is None:
                raise DataError(f"benchmark contains unknown relation {pid}")
            relation_records = records_by_relation[pid]
            relation_sets = sets_by_relation.get(pid, [])
            if len(relation_sets) != len(relation_records):
                raise DataError(
                    f"{pid}: {len(relation_records)} benchmark records but "
                    f"{len(relation_sets)} prediction sets; rerun `kbforge probe`"
                )
            dictionary = _dictionary_for(config, spec)
            records_by_key = {
                (r.subject.id, r.relation): r for r in relation_records
            }
            judged = judge_prediction_sets(relation_sets, records_by_key, dictionary)
            features = relation_features(relation_records, client.in_vocab)
            majority, _ = majority_baseline(relation_records, dictionary)
            rand, _ = random_baseline(relation_records, config.seed, dictionary)
            reports.append(
                build_relation_report(
                    pid,
                    judged,
                    features,
                    majority_precision=majority,
                    random_precision=rand,
                    target_p=config.target_precision,
                )
            )
    write_text(
        artifact_path(config, "reports"),
        serialize_reports(reports, config.provenance),
    )
    table = (
        "#kbforge-report-table v1\n"
        + provenance_line(config.config_hash(), config.seed)
        + "\n"
        + aggregate_table(reports)
    )
    write_text(artifact_path(config, "report_table"), table)
    print(f"wrote {len(reports)} relation reports to {artifact_path(config, 'reports')}")
    return EXIT_OK


def cmd_calibrate(config: PipelineConfig, args) -> int:
    path = _require_artifact(config, "reports", args.force)
    with open(path, encoding="utf-8") as fp:
        reports = parse_reports(fp)
    stamped = read_provenance(path) or {}
    source_eval_id = stamped.get("config", config.config_hash())
    profiles = []
    for report in reports:
        if report.threshold_probability is None:
            print(
                f"{report.relation}: no calibratable threshold at precision "
                f"{report.precision_target}; excluded from completion",
                file=sys.stderr,
            )
            continue
        profiles.append(calibrate(report, source_eval_id=source_eval_id))
    if not profiles:
        raise DataError(
            "no relation reached the precision target; nothing to calibrate"
        )
    write_text(
        artifact_path(config, "thresholds"),
        serialize_profiles(profiles, config.provenance),
    )
    print(f"calibrated {len(profiles)} of {len(reports)} relations")
    return EXIT_OK


def cmd_gen_candidates(config: PipelineConfig, args) -> int:
    path = _require_artifact(config, "thresholds", args.force)
    with open(path, encoding="utf-8") as fp:
        profiles = {p.relation: p for p in parse_profiles(fp)}
    specs = load_specs(config)
    by_pid = {spec.pid: spec for spec in specs}
    unknown = sorted(set(profiles) - set(by_pid), key=_pid_order)
    if unknown:
        raise DataError(
            "thresholds reference relations missing from the relations file: "
            + ", ".join(unknown)
        )

    all_candidates = []
    all_retained = []
    all_tasks = []
    meta_relations: dict[str, dict] = {}
    with open_backend(config) as client:
        for pid in sorted(profiles, key=_pid_order):
            spec = by_pid[pid]
            if spec.subject_type is not None:
                subject_type = spec.subject_type.id
            else:
                counts = subject_type_counts(
                    config.dump, pid, workers=config.workers
                )
                subject_type = modal_subject_type(counts)
            if subject_type is None:
                print(
                    f"{pid}: no subjects hold the relation; skipped",
                    file=sys.stderr,
                )
                continue
            population: list[int] = []
            pairs = sample_missing_facts(
                config.dump,
                pid,
                subject_type,
                n=config.missing_sample_n,
                seed=config.seed,
                workers=config.workers,
                population=population,
            )
            stubs = stubs_from_pairs(pairs)
            sets = probe_batch(stubs, by_pid, client, k=config.k)
            candidates = candidates_from_predictions(stubs, sets)
            retained, fraction = filter_high_accuracy(candidates, profiles[pid])
            tasks = sample_for_review(
                retained, spec, n=REVIEW_SAMPLE_N, seed=config.seed
            )
            all_candidates += candidates
            all_retained += retained
            all_tasks += tasks
            meta_relations[pid] = {
                "subject_type": subject_type,
                "population": population[0],
                "pool": len(pairs),
                "high_acc_fraction": fraction,
                "retained": len(retained),
                "review_tasks": len(tasks),
            }
    write_candidates(
        all_candidates, artifact_path(config, "candidates"), config.provenance
    )
    write_candidates(
        all_retained, artifact_path(config, "retained"), config.provenance
    )
    write_text(
        artifact_path(config, "review_tasks"),
        dump_jsonl((task_to_payload(t) for t in all_tasks), config.provenance),
    )
    meta = dict(config.provenance)
    meta["relations"] = meta_relations
    _write_json(artifact_path(config, "missing_meta"), meta)
    print(
        f"generated {len(all_candidates)} candidates, retained {len(all_retained)}, "
        f"sampled {len(all_tasks)} review tasks"
    )
    return EXIT_OK


def cmd_report(config: PipelineConfig, args) -> int:
    meta = _read_json(_require_artifact(config, "missing_meta", args.force))
    specs = {spec.pid: spec for spec in load_specs(config)}
    relations = meta.get("relations", {})
    if not relations:
        raise DataError("missing_meta.json lists no relations")

    benchmark_meta: dict = {}
    needs_benchmark = [
        pid for pid in relations if pid not in config.cardinality
    ]
    if needs_benchmark:
        benchmark_meta = _read_json(
            _require_artifact(config, "benchmark_meta", args.force)
        ).get("relations", {})

    problems = []
    estimates = []
    for pid in sorted(relations, key=_pid_order):
        row = relations[pid]
        spec = specs.get(pid)
        if spec is None:
            raise DataError(f"missing_meta references unknown relation {pid}")
        if pid not in config.accuracy:
            problems.append(
                f"accuracy.{pid}: required to estimate addable facts "
                f"(human-review accuracy for {spec.name})"
            )
            continue
        cardinality = config.cardinality.get(pid)
        if cardinality is None:
            cardinality = benchmark_meta.get(pid, {}).get("total_pairs")
        if not cardinality:
            problems.append(
                f"cardinality.{pid}: not in config and not in benchmark_meta.json"
            )
            continue
        estimates.append(
            estimate_completion(
                spec.name,
                cardinality_wd=cardinality,
                n_missing=row["population"],
                high_acc_fraction=row["high_acc_fraction"],
                accuracy=config.accuracy[pid],
            )
        )
    if problems:
        raise ConfigError(problems)

    payloads = [
        {
            "relation": e.relation,
            "cardinality_wd": e.cardinality_wd,
            "n_missing": e.n_missing,
            "high_acc_fraction": e.high_acc_fraction,
            "accuracy": e.accuracy,
            "addable": e.addable,
            "growth_factor": e.growth_factor,
        }
        for e in estimates
    ]
    write_text(
        artifact_path(config, "estimates"),
        dump_jsonl(payloads, config.provenance),
    )
    table = (
        "#kbforge-estimates v1\n"
        + provenance_line(config.config_hash(), config.seed)
        + "\n"
        + format_estimates(estimates)
    )
    write_text(artifact_path(config, "estimates_table"), table)
    print(format_estimates(estimates), end="")
    return EXIT_OK


def cmd_review_serve(config: PipelineConfig, args) -> int:
    host, _, port_text = config.review_address.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError(
            [f"review_address: bad port in {config.review_address!r}"]
        ) from None
    config.out_dir.mkdir(parents=True, exist_ok=True)
    store = ReviewStore(config.out_dir / "review_events.jsonl")
    tasks_path = artifact_path(config, "review_tasks")
    if tasks_path.exists():
        with open(tasks_path, encoding="utf-8") as fp:
            payloads = [payload for _, payload in iter_jsonl(fp)]
        if payloads:
            from ..review.store import task_from_payload

            campaign_id, created = store.create_campaign(
                [task_from_payload(p) for p in payloads]
            )
            verb = "created" if created else "resumed"
            print(f"{verb} campaign {campaign_id} with {len(payloads)} tasks")
    server = ReviewServer(store, host=host or "127.0.0.1", port=port)
    server.start()
    print(f"review service listening on {server.url}", flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        store.close()
    return EXIT_OK


_COMMANDS = {
    "build-benchmark": cmd_build_benchmark,
    "stats": cmd_stats,
    "probe": cmd_probe,
    "evaluate": cmd_evaluate,
    "calibrate": cmd_calibrate,
    "gen-candidates": cmd_gen_candidates,
    "review-serve": cmd_review_serve,
    "report": cmd_report,
}

_COMMAND_HELP = {
    "build-benchmark": "sample benchmark records from a dump",
    "stats": "dataset statistics over a built benchmark",
    "probe": "query the fill-mask backend for every record",
    "evaluate": "judge predictions and write relation reports",
    "calibrate": "project reports onto completion thresholds",
    "gen-candidates": "sample missing pairs and keep high-accuracy predictions",
    "review-serve": "serve the human-review HTTP API",
    "report": "estimate addable facts and growth factors",
}


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit 1, not argparse's default 2.

    Exit code 2 is reserved for transport failures, so a mistyped flag or
    unknown subcommand must report as a validation error instead.
    """

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", default="kbforge.cfg", help="config file path")
    shared.add_argument("--seed", type=int, default=None, help="override seed")
    shared.add_argument("--k", type=int, default=None, help="override top-k")
    shared.add_argument(
        "--precision",
        type=float,
        default=None,
        dest="target_precision",
        help="override target precision",
    )
    shared.add_argument(
        "--max-pairs",
        type=int,
        default=None,
        dest="max_pairs",
        help="override per-relation pair cap",
    )
    shared.add_argument("--out", default=None, help="override output directory")
    shared.add_argument(
        "--workers", type=int, default=None, help="override worker count"
    )
    shared.add_argument(
        "--force",
        action="store_true",
        help="consume artifacts even if their config hash differs",
    )
    parser = _Parser(
        prog="kbforge",
        description="knowledge-base completion pipeline",
    )
    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    for name, handler in _COMMANDS.items():
        sub = commands.add_parser(name, parents=[shared], help=_COMMAND_HELP[name])
        sub.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = read_config(args.config)
        config = apply_overrides(
            config,
            seed=args.seed,
            k=args.k,
            target_precision=args.target_precision,
            max_pairs=args.max_pairs,
            out=args.out,
            workers=args.workers,
        )
        problems = config.problems()
        if problems:
            raise ConfigError(problems)
        config.out_dir.mkdir(parents=True, exist_ok=True)
        return args.handler(config, args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_VALIDATION
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (FormatError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ReviewError as exc:
        print(f"review error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION if exc.code == "validation" else EXIT_DATA
    except KbforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
