"""Command line: initialize, fine-tune, and serve model checkpoints.

    modelsrv init --words words.txt --out ckpt/
    modelsrv finetune --checkpoint ckpt/ --benchmark benchmark.jsonl \
        --relation P103 --template "The native language of [X] is [Y] ." \
        --out tuned/ --epochs 40 --lr 1e-3
    modelsrv serve --checkpoint tuned/ --port 8763
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .model import TinyMaskedLM, fresh_model
from .server import VOCAB_PAGE_SIZE, ModelServer
from .train import (
    DEFAULT_BATCH,
    DEFAULT_EPOCHS,
    DEFAULT_LR,
    TrainError,
    fine_tune_checkpoint,
    read_benchmark,
)
from .vocab import WordPieceVocab


def cmd_init(args) -> int:
    words = [
        w
        for w in Path(args.words).read_text(encoding="utf-8").split()
        if w
    ]
    vocab = WordPieceVocab.from_words(words)
    model = fresh_model(vocab, dim=args.dim, layers=args.layers, seed=args.seed)
    model.save_checkpoint(args.out)
    print(f"initialized checkpoint with {len(vocab)} tokens at {args.out}")
    return 0


def cmd_finetune(args) -> int:
    records = [
        r for r in read_benchmark(args.benchmark) if r.relation_id == args.relation
    ]
    if not records:
        print(f"no records for {args.relation} in {args.benchmark}", file=sys.stderr)
        return 1
    split, log = fine_tune_checkpoint(
        args.checkpoint,
        args.out,
        records,
        args.template,
        args.relation,
        ratio=args.ratio,
        seed=args.seed,
        epochs=args.epochs,
        lr=args.lr,
        batch_size=args.batch_size,
    )
    final = log[-1]["loss"] if log else "n/a"
    print(
        f"fine-tuned on {len(split.train)} train / {len(split.test)} test "
        f"records over {args.epochs} epochs (final loss {final}); "
        f"checkpoint at {args.out}"
    )
    return 0


def cmd_serve(args) -> int:
    if args.hf:
        from .hf import PretrainedMaskedLM

        model = PretrainedMaskedLM(args.hf)
    else:
        model = TinyMaskedLM.load_checkpoint(args.checkpoint)
    server = ModelServer(
        model, host=args.host, port=args.port, page_size=args.page_size
    )
    print(f"model server listening on {server.url}", flush=True)
    server.serve_until_interrupt()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelsrv", description="reference fill-mask model server"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a fresh random checkpoint")
    p.add_argument("--words", required=True, help="whitespace-separated word list")
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("finetune", help="extend vocabulary and fine-tune")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--relation", required=True, help="property id to train on")
    p.add_argument("--template", required=True, help="cloze template with [X]/[Y]")
    p.add_argument("--out", required=True)
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    p.add_argument("--lr", type=float, default=DEFAULT_LR)
    p.add_argument("--batch-size", type=int, default=DEFAULT_BATCH)
    p.set_defaults(fn=cmd_finetune)

    p = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    p.add_argument("--checkpoint", help="TinyMaskedLM checkpoint directory")
    p.add_argument("--hf", help="local pretrained transformers checkpoint instead")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--page-size", type=int, default=VOCAB_PAGE_SIZE)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.fn is cmd_serve and not (args.checkpoint or args.hf):
        print("serve needs --checkpoint or --hf", file=sys.stderr)
        return 1
    try:
        return args.fn(args)
    except (TrainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
