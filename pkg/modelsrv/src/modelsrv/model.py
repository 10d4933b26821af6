"""A small trainable masked language model with a tied output head.

Checkpoint directory layout (the serving and training contract):

    config.json        architecture hyperparameters + vocab size
    vocab.txt          one token per line, line order = token id
    weights.pt         torch state_dict
    training_log.jsonl appended by fine-tuning, one {"epoch", "loss"} per line

The model is deliberately tiny: it exists to serve the wire protocol
faithfully and to memorize small relations during fine-tuning tests, not
to be a competitive language model.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from .vocab import MASK, WordPieceVocab

CONFIG_FILE = "config.json"
VOCAB_FILE = "vocab.txt"
WEIGHTS_FILE = "weights.pt"
TRAINING_LOG_FILE = "training_log.jsonl"


class ModelError(ValueError):
    """A request or checkpoint violates the model's contract."""


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    dim: int = 64
    layers: int = 2
    heads: int = 4
    feedforward: int = 128
    max_len: int = 48
    seed: int = 0


class TinyMaskedLM(nn.Module):
    """Transformer encoder over word pieces; logits tied to the embedding."""

    def __init__(self, config: ModelConfig, vocab: WordPieceVocab) -> None:
        super().__init__()
        if config.vocab_size != len(vocab):
            raise ModelError(
                f"config vocab_size {config.vocab_size} != vocabulary {len(vocab)}"
            )
        self.config = config
        self.vocab = vocab
        torch.manual_seed(config.seed)
        self.tok_emb = nn.Embedding(config.vocab_size, config.dim)
        self.pos_emb = nn.Embedding(config.max_len, config.dim)
        layer = nn.TransformerEncoderLayer(
            d_model=config.dim,
            nhead=config.heads,
            dim_feedforward=config.feedforward,
            dropout=0.0,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(
            layer, num_layers=config.layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(config.dim)
        self.out_bias = nn.Parameter(torch.zeros(config.vocab_size))

    def forward(self, token_ids: torch.Tensor) -> torch.Tensor:
        """(batch, seq) int64 -> (batch, seq, vocab) logits."""
        if token_ids.shape[1] > self.config.max_len:
            raise ModelError(
                f"sequence length {token_ids.shape[1]} exceeds {self.config.max_len}"
            )
        positions = torch.arange(token_ids.shape[1], device=token_ids.device)
        hidden = self.tok_emb(token_ids) + self.pos_emb(positions)
        hidden = self.norm(self.encoder(hidden))
        return hidden @ self.tok_emb.weight.T + self.out_bias

    def _encode_prompt(self, prompt: str) -> tuple[list[int], int]:
        tokens = self.vocab.tokenize(prompt)
        mask_positions = [i for i, t in enumerate(tokens) if t == MASK]
        if len(mask_positions) != 1:
            raise ModelError(
                f"prompt must contain exactly one {MASK}, found {len(mask_positions)}"
            )
        if len(tokens) > self.config.max_len:
            raise ModelError(
                f"prompt tokenizes to {len(tokens)} pieces, limit {self.config.max_len}"
            )
        return [self.vocab.token_id(t) for t in tokens], mask_positions[0]

    @torch.no_grad()
    def distribution(self, prompt: str) -> torch.Tensor:
        """Probability over the full vocabulary at the mask position.

        Softmax is taken in float64 so the distribution sums to 1 well
        inside the wire protocol's tolerance even for large vocabularies.
        """
        self.eval()
        ids, mask_pos = self._encode_prompt(prompt)
        logits = self(torch.tensor([ids]))[0, mask_pos]
        return torch.softmax(logits.double(), dim=-1)

    def fill_mask(self, prompt: str, k: int) -> list[tuple[str, float]]:
        """Top-k (token, probability), ties broken by token id; k clamped."""
        if k < 1:
            raise ModelError(f"k must be >= 1: {k}")
        probs = self.distribution(prompt)
        k = min(k, len(self.vocab))
        top = torch.topk(probs, k)
        return [
            (self.vocab.token(int(i)), float(p))
            for p, i in zip(top.values.tolist(), top.indices.tolist())
        ]

    def tokenize(self, text: str) -> list[str]:
        return self.vocab.tokenize(text)

    @torch.no_grad()
    def extend_vocab(self, new_tokens: list[str]) -> None:
        """Grow the vocabulary; new embeddings warm-start from their pieces.

        Each added token's embedding initializes to the mean of the
        embeddings of its word-piece decomposition under the current
        vocabulary; its output bias starts at zero.
        """
        if not new_tokens:
            return
        piece_ids = [
            [self.vocab.token_id(p) for p in self.vocab.word_pieces(token)]
            for token in new_tokens
        ]
        self.vocab.extend(new_tokens)
        old = self.tok_emb.weight
        grown = nn.Embedding(len(self.vocab), self.config.dim)
        grown.weight[: old.shape[0]] = old
        for row, ids in enumerate(piece_ids, start=old.shape[0]):
            grown.weight[row] = old[ids].mean(dim=0)
        self.tok_emb = grown
        self.out_bias = nn.Parameter(
            torch.cat([self.out_bias, torch.zeros(len(new_tokens))])
        )
        self.config = dataclasses.replace(self.config, vocab_size=len(self.vocab))

    def save_checkpoint(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / CONFIG_FILE).write_text(
            json.dumps(asdict(self.config), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        self.vocab.save(directory / VOCAB_FILE)
        torch.save(self.state_dict(), directory / WEIGHTS_FILE)
        return directory

    @classmethod
    def load_checkpoint(cls, directory: str | Path) -> "TinyMaskedLM":
        directory = Path(directory)
        try:
            config = ModelConfig(
                **json.loads((directory / CONFIG_FILE).read_text(encoding="utf-8"))
            )
        except FileNotFoundError as exc:
            raise ModelError(f"not a checkpoint directory: {directory}") from exc
        except TypeError as exc:
            raise ModelError(f"unrecognized config field: {exc}") from exc
        vocab = WordPieceVocab.load(directory / VOCAB_FILE)
        model = cls(config, vocab)
        state = torch.load(directory / WEIGHTS_FILE, weights_only=True)
        model.load_state_dict(state)
        return model


def fresh_model(vocab: WordPieceVocab, **overrides) -> TinyMaskedLM:
    """A randomly initialized model sized to the vocabulary."""
    config = ModelConfig(vocab_size=len(vocab), **overrides)
    return TinyMaskedLM(config, vocab)
