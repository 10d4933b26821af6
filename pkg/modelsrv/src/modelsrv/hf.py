"""Adapter serving a pretrained transformers masked LM, when one exists.

The wire protocol's mask marker is the literal ``[MASK]``; models whose
tokenizer uses a different mask string get it translated here. Loading
is strictly local (no downloads): point it at a directory containing a
saved checkpoint, e.g. via ``modelsrv serve --hf /path/to/checkpoint``.
"""

from __future__ import annotations

from pathlib import Path


class _HFVocab:
    """Minimal vocab view: ordered tokens, as the server handler expects."""

    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tuple(tokens)


class PretrainedMaskedLM:
    """Duck-type of TinyMaskedLM's serving surface over a transformers model."""

    def __init__(self, directory: str | Path) -> None:
        try:
            import torch
            from transformers import AutoModelForMaskedLM, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError(f"transformers unavailable: {exc}") from exc
        directory = str(directory)
        self._torch = torch
        self._tokenizer = AutoTokenizer.from_pretrained(
            directory, local_files_only=True
        )
        self._model = AutoModelForMaskedLM.from_pretrained(
            directory, local_files_only=True
        )
        self._model.eval()
        if self._tokenizer.mask_token is None:
            raise RuntimeError("checkpoint tokenizer has no mask token")
        by_id = sorted(self._tokenizer.get_vocab().items(), key=lambda kv: kv[1])
        self.vocab = _HFVocab([token for token, _ in by_id])

    def tokenize(self, text: str) -> list[str]:
        return self._tokenizer.tokenize(text)

    def fill_mask(self, prompt: str, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise ValueError(f"k must be >= 1: {k}")
        torch = self._torch
        prompt = prompt.replace("[MASK]", self._tokenizer.mask_token)
        encoded = self._tokenizer(prompt, return_tensors="pt")
        mask_positions = (
            encoded["input_ids"][0] == self._tokenizer.mask_token_id
        ).nonzero(as_tuple=True)[0]
        if len(mask_positions) != 1:
            raise ValueError(
                f"prompt must contain exactly one [MASK], found {len(mask_positions)}"
            )
        with torch.no_grad():
            logits = self._model(**encoded).logits[0, int(mask_positions[0])]
        probs = torch.softmax(logits.double(), dim=-1)
        top = torch.topk(probs, min(k, len(self.vocab.tokens)))
        return [
            (self.vocab.tokens[int(i)], float(p))
            for p, i in zip(top.values.tolist(), top.indices.tolist())
        ]
