"""Subject-disjoint benchmark splits and vocabulary-extension fine-tuning.

Benchmark files are the line-delimited records the pipeline emits:
a ``#``-prefixed header block followed by one JSON object per line with
``subject_id``, ``subject_label``, ``relation_id``, and ``objects``
(a list of {id, label}). Only that documented surface is consumed here.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import torch
from torch import nn

from .model import TRAINING_LOG_FILE, TinyMaskedLM
from .vocab import MASK, WordPieceVocab

MAX_ADDED_TOKENS = 2000

DEFAULT_EPOCHS = 3
DEFAULT_LR = 3e-5
DEFAULT_BATCH = 32


class TrainError(ValueError):
    """A split, extension, or training input violates its contract."""


@dataclass(frozen=True)
class MaskedFact:
    """One benchmark record, reduced to what probing and training need."""

    subject_id: str
    subject_label: str
    relation_id: str
    object_labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.object_labels:
            raise TrainError(f"record without objects: {self.subject_id}")


def read_benchmark(path: str | Path) -> list[MaskedFact]:
    """Parse a benchmark file, skipping the ``#`` header lines."""
    facts = []
    for i, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            payload = json.loads(line)
            facts.append(
                MaskedFact(
                    subject_id=payload["subject_id"],
                    subject_label=payload["subject_label"],
                    relation_id=payload["relation_id"],
                    object_labels=tuple(
                        obj["label"] for obj in payload["objects"]
                    ),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TrainError(f"{path}:{i}: bad benchmark line: {exc}") from exc
    return facts


@dataclass(frozen=True)
class TrainSplit:
    """80/20 record split that never puts one subject on both sides."""

    relation: str
    train: tuple[MaskedFact, ...]
    test: tuple[MaskedFact, ...]

    def __post_init__(self) -> None:
        overlap = {f.subject_id for f in self.train} & {
            f.subject_id for f in self.test
        }
        if overlap:
            raise TrainError(f"subjects on both sides: {sorted(overlap)[:3]}")


def make_split(
    records: Sequence[MaskedFact], ratio: float = 0.8, seed: int = 0
) -> TrainSplit:
    """Deterministic subject-disjoint split, ``ratio`` of pairs in train.

    Records sharing a subject move as a block, so the achieved ratio can
    deviate when blocks are chunky; with distinct subjects it is exact.
    """
    if not records:
        raise TrainError("benchmark is empty")
    if not 0.0 < ratio < 1.0:
        raise TrainError(f"ratio out of (0,1): {ratio}")
    relations = {r.relation_id for r in records}
    if len(relations) != 1:
        raise TrainError(f"records span relations: {sorted(relations)}")

    by_subject: dict[str, list[MaskedFact]] = {}
    for record in records:
        by_subject.setdefault(record.subject_id, []).append(record)
    subjects = sorted(by_subject)
    random.Random(seed).shuffle(subjects)

    target = round(ratio * len(records))
    train: list[MaskedFact] = []
    test: list[MaskedFact] = []
    for subject in subjects:
        side = train if len(train) < target else test
        side.extend(by_subject[subject])
    return TrainSplit(relations.pop(), tuple(train), tuple(test))


@dataclass(frozen=True)
class VocabExtension:
    """Object labels to add as whole tokens, capped per relation."""

    relation: str
    added_tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.added_tokens) > MAX_ADDED_TOKENS:
            raise TrainError(
                f"{len(self.added_tokens)} added tokens exceed the "
                f"{MAX_ADDED_TOKENS}-per-relation cap"
            )
        if len(set(self.added_tokens)) != len(self.added_tokens):
            raise TrainError("duplicate tokens in extension")


def plan_extension(
    records: Iterable[MaskedFact],
    vocab: WordPieceVocab,
    relation: str,
    cap: int = MAX_ADDED_TOKENS,
) -> VocabExtension:
    """Ground-truth object labels absent from the vocabulary, most
    frequent first, ties by label; at most ``cap`` of them."""
    counts: dict[str, int] = {}
    for record in records:
        for label in record.object_labels:
            if label not in vocab:
                counts[label] = counts.get(label, 0) + 1
    ranked = sorted(counts, key=lambda label: (-counts[label], label))
    return VocabExtension(relation, tuple(ranked[:cap]))


def render_statement(template: str, subject_label: str, object_label: str) -> str:
    if "[X]" not in template or "[Y]" not in template:
        raise TrainError(f"template lacks [X]/[Y]: {template!r}")
    return template.replace("[X]", subject_label).replace("[Y]", object_label)


def _training_rows(
    split: TrainSplit, template: str, vocab: WordPieceVocab
) -> list[tuple[list[int], int, int]]:
    """(input ids with the object masked, mask position, target id) rows.

    Only single-token objects are trainable; multi-piece objects are
    dropped here, which is exactly the gap vocabulary extension closes.
    """
    rows = []
    for record in split.train:
        for label in record.object_labels:
            if vocab.word_pieces(label) != [label]:
                continue
            prompt = render_statement(template, record.subject_label, MASK)
            ids = []
            mask_pos = -1
            for token in vocab.tokenize(prompt):
                if token == MASK:
                    mask_pos = len(ids)
                ids.append(vocab.token_id(token))
            rows.append((ids, mask_pos, vocab.token_id(label)))
    return rows


def extend_vocab_and_fine_tune(
    model: TinyMaskedLM,
    split: TrainSplit,
    extension: VocabExtension,
    template: str,
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    batch_size: int = DEFAULT_BATCH,
    seed: int = 0,
    log_path: str | Path | None = None,
) -> list[dict]:
    """Grow the vocabulary, then fine-tune on masked object prediction.

    Mutates ``model`` in place (extended embeddings, trained weights) and
    returns the per-epoch log records {"epoch", "loss"}, also appended to
    ``log_path`` (line-delimited) when given. Zero epochs performs the
    extension only, leaving new-token embeddings at their warm-start
    (mean of word pieces) initialization.
    """
    if extension.relation != split.relation:
        raise TrainError(
            f"extension for {extension.relation}, split for {split.relation}"
        )
    if epochs < 0:
        raise TrainError(f"epochs must be >= 0: {epochs}")

    addable = []
    for token in extension.added_tokens:
        if token in model.vocab:
            warnings.warn(f"token already in vocabulary, skipped: {token!r}")
            continue
        addable.append(token)
    model.extend_vocab(addable)

    log: list[dict] = []
    if epochs:
        rows = _training_rows(split, template, model.vocab)
        if not rows:
            raise TrainError("no single-token training rows after extension")
        width = max(len(ids) for ids, _, _ in rows)
        inputs = torch.full((len(rows), width), model.vocab.pad_id)
        mask_pos = torch.empty(len(rows), dtype=torch.long)
        targets = torch.empty(len(rows), dtype=torch.long)
        for i, (ids, pos, target) in enumerate(rows):
            inputs[i, : len(ids)] = torch.tensor(ids)
            mask_pos[i] = pos
            targets[i] = target

        generator = torch.Generator().manual_seed(seed)
        optimizer = torch.optim.Adam(model.parameters(), lr=lr)
        loss_fn = nn.CrossEntropyLoss()
        model.train()
        for epoch in range(1, epochs + 1):
            order = torch.randperm(len(rows), generator=generator)
            total = 0.0
            for start in range(0, len(rows), batch_size):
                batch = order[start : start + batch_size]
                logits = model(inputs[batch])
                picked = logits[torch.arange(len(batch)), mask_pos[batch]]
                loss = loss_fn(picked, targets[batch])
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                total += float(loss.detach()) * len(batch)
            log.append({"epoch": epoch, "loss": round(total / len(rows), 6)})
        model.eval()

    if log_path is not None:
        with open(log_path, "a", encoding="utf-8") as fh:
            for entry in log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return log


def fine_tune_checkpoint(
    checkpoint_dir: str | Path,
    out_dir: str | Path,
    records: Sequence[MaskedFact],
    template: str,
    relation: str,
    ratio: float = 0.8,
    seed: int = 0,
    **train_kwargs,
) -> tuple[TrainSplit, list[dict]]:
    """Checkpoint-to-checkpoint convenience used by the command line."""
    model = TinyMaskedLM.load_checkpoint(checkpoint_dir)
    split = make_split(records, ratio=ratio, seed=seed)
    extension = plan_extension(split.train, model.vocab, relation)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log = extend_vocab_and_fine_tune(
        model,
        split,
        extension,
        template,
        seed=seed,
        log_path=out / TRAINING_LOG_FILE,
        **train_kwargs,
    )
    model.save_checkpoint(out)
    return split, log


__all__ = [
    "MaskedFact",
    "TrainSplit",
    "VocabExtension",
    "extend_vocab_and_fine_tune",
    "fine_tune_checkpoint",
    "make_split",
    "plan_extension",
    "read_benchmark",
    "render_statement",
]
