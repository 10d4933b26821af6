from __future__ import annotations

import random
import time

import pytest

from kbforge.core.types import BenchmarkRecord, EntityRef, Prediction
from kbforge.metrics.ranking import JudgedPrediction

from .pipeline_fixtures import run_pipeline, write_golden_project


def make_record(subject_id, subject_label, relation, objects):
    """objects: list of (id, label) pairs."""
    return BenchmarkRecord(
        subject=EntityRef(subject_id, subject_label),
        relation=relation,
        valid_objects=tuple(EntityRef(i, l) for i, l in objects),
    )


def make_judged(probability_correct_pairs, relation="P103"):
    """Build a ranked judged list from (probability, correct) pairs.

    Record keys are synthesized in input order so tie-breaking is exercised
    deterministically. probability None marks an unrankable record.
    """
    judged = []
    for i, (prob, correct) in enumerate(probability_correct_pairs):
        key = (f"Q{i + 1}", relation)
        top = None if prob is None else Prediction("t", prob, 1)
        judged.append(JudgedPrediction(key, top, correct))
    return judged


def random_judged(rng: random.Random, max_n: int = 50):
    n = rng.randrange(0, max_n + 1)
    pairs = []
    for _ in range(n):
        if rng.random() < 0.05:
            pairs.append((None, False))
        else:
            # coarse grid keeps plenty of probability ties in play
            prob = rng.randrange(0, 11) / 10
            pairs.append((prob, rng.random() < 0.5))
    return make_judged(pairs)


@pytest.fixture
def rng():
    return random.Random(20240817)


@pytest.fixture(scope="session")
def golden(tmp_path_factory):
    """One golden-project pipeline run, serial and eight-way, shared suite-wide.

    Returns (project, elapsed seconds for both runs). Building the project
    and running it twice dominates test time, so every module that checks
    the same artifacts reuses this single run.
    """
    root = tmp_path_factory.mktemp("golden")
    project = write_golden_project(root)
    started = time.monotonic()
    run_pipeline(project.config, root / "out1", workers=1)
    run_pipeline(project.config, root / "out8", workers=8)
    elapsed = time.monotonic() - started
    return project, elapsed
