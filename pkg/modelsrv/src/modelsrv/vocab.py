"""Greedy longest-match-first word-piece vocabulary.

A word is either a whole vocabulary token or a sequence of pieces where
every piece after the first carries the ``##`` continuation prefix. The
base vocabulary always contains every printable ASCII letter, digit, and
punctuation mark in both positions, so any ASCII word decomposes without
falling back to ``[UNK]``; only words with other characters do.

The literal ``[MASK]`` in input text is the wire-protocol mask marker
and is always kept as one token.
"""

from __future__ import annotations

import string
from pathlib import Path
from typing import Iterable, Sequence

PAD, UNK, MASK = "[PAD]", "[UNK]", "[MASK]"
SPECIALS = (PAD, UNK, MASK)

_ASCII_CHARS = string.ascii_letters + string.digits + string.punctuation
_PUNCT = set(string.punctuation)


class VocabError(ValueError):
    """A vocabulary file or token list violates the format."""


def _base_pieces() -> list[str]:
    pieces = []
    for ch in _ASCII_CHARS:
        pieces.append(ch)
        pieces.append(f"##{ch}")
    return pieces


def pre_split(text: str) -> list[str]:
    """Whitespace split, then punctuation split, with ``[MASK]`` protected."""
    words: list[str] = []
    for chunk in text.split():
        while chunk:
            if chunk.startswith(MASK):
                words.append(MASK)
                chunk = chunk[len(MASK):]
                continue
            mask_at = chunk.find(MASK)
            head, chunk = (
                (chunk[:mask_at], chunk[mask_at:]) if mask_at >= 0 else (chunk, "")
            )
            run = ""
            for ch in head:
                if ch in _PUNCT:
                    if run:
                        words.append(run)
                        run = ""
                    words.append(ch)
                else:
                    run += ch
            if run:
                words.append(run)
    return words


class WordPieceVocab:
    """An ordered token list; position order defines the token ids."""

    def __init__(self, tokens: Sequence[str]) -> None:
        if list(tokens[: len(SPECIALS)]) != list(SPECIALS):
            raise VocabError(f"vocabulary must start with {SPECIALS}")
        seen: set[str] = set()
        for token in tokens:
            if token in seen:
                raise VocabError(f"duplicate token: {token!r}")
            seen.add(token)
        self._tokens = list(tokens)
        self._ids = {token: i for i, token in enumerate(self._tokens)}

    @classmethod
    def from_words(cls, words: Iterable[str]) -> "WordPieceVocab":
        """Base vocabulary: specials, ASCII pieces, then the given words."""
        tokens = list(SPECIALS) + _base_pieces()
        known = set(tokens)
        for word in sorted(set(words)):
            for piece in pre_split(word):
                if piece not in known:
                    known.add(piece)
                    tokens.append(piece)
        return cls(tokens)

    @classmethod
    def load(cls, path: str | Path) -> "WordPieceVocab":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([line for line in lines if line])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            "".join(f"{token}\n" for token in self._tokens), encoding="utf-8"
        )

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self._tokens)

    def token_id(self, token: str) -> int:
        try:
            return self._ids[token]
        except KeyError:
            raise VocabError(f"token not in vocabulary: {token!r}") from None

    def token(self, token_id: int) -> str:
        return self._tokens[token_id]

    @property
    def mask_id(self) -> int:
        return self._ids[MASK]

    @property
    def pad_id(self) -> int:
        return self._ids[PAD]

    def extend(self, new_tokens: Sequence[str]) -> list[int]:
        """Append tokens, returning their new ids; duplicates are an error."""
        ids = []
        for token in new_tokens:
            if token in self._ids:
                raise VocabError(f"token already in vocabulary: {token!r}")
            self._ids[token] = len(self._tokens)
            self._tokens.append(token)
            ids.append(self._ids[token])
        return ids

    def word_pieces(self, word: str) -> list[str]:
        """Greedy longest-match decomposition; [UNK] when any span fails."""
        if word in self._ids:
            return [word]
        pieces: list[str] = []
        start = 0
        while start < len(word):
            end = len(word)
            piece = None
            while end > start:
                candidate = word[start:end]
                if start > 0:
                    candidate = f"##{candidate}"
                if candidate in self._ids:
                    piece = candidate
                    break
                end -= 1
            if piece is None:
                return [UNK]
            pieces.append(piece)
            start = end
        return pieces

    def tokenize(self, text: str) -> list[str]:
        tokens: list[str] = []
        for word in pre_split(text):
            if word == MASK:
                tokens.append(MASK)
            else:
                tokens.extend(self.word_pieces(word))
        return tokens

    def encode(self, text: str) -> list[int]:
        return [self._ids[token] for token in self.tokenize(text)]
