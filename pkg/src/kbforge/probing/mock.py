"""Deterministic in-process fill-mask backend for offline runs.

The model is a fixture table mapping prompts to scored token lists;
unknown prompts fall back to a uniform distribution over a configured
token list, so every query is answerable without a network or weights.

Fixture file format, one mapping per line:

    prompt TAB token:prob[,token:prob...]

plus optional directives: ``#fallback: tok,tok`` (uniform fallback list),
``#vocab: tok,tok`` (extra vocabulary tokens), ``#max_k: n``. Other
``#`` lines are comments. A value of ``!transport`` makes the prompt
fail permanently at the transport level; ``!flaky:N,token:prob,...``
fails the first N attempts and then serves the list — both exist to
exercise retry and error-annotation paths end to end.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Iterable

from ..core.types import KbforgeError

UNKNOWN_TOKEN = "[UNK]"
MASK_TOKEN = "[MASK]"

VOCAB_PAGE_SIZE = 1000


class MockFixtureError(KbforgeError):
    """The mock fixture file cannot be interpreted."""


class MockTransportFailure(Exception):
    """Simulated backend outage; the HTTP layer turns this into a 503."""


def _parse_scored_list(text: str, where: str) -> list[tuple[str, float]]:
    scored = []
    previous = 1.0
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        token, sep, prob_text = part.rpartition(":")
        if not sep or not token:
            raise MockFixtureError(f"{where}: malformed token:prob pair {part!r}")
        try:
            prob = float(prob_text)
        except ValueError as exc:
            raise MockFixtureError(f"{where}: bad probability {prob_text!r}") from exc
        if not 0.0 <= prob <= 1.0:
            raise MockFixtureError(f"{where}: probability out of range {prob}")
        if prob > previous:
            raise MockFixtureError(f"{where}: probabilities must be non-increasing")
        previous = prob
        scored.append((token, prob))
    return scored


class MockModel:
    """Table-driven fill-mask model with seeded-in, fully static behavior."""

    def __init__(
        self,
        table: dict[str, list[tuple[str, float]]],
        fallback: list[str],
        extra_vocab: Iterable[str] = (),
        max_k: int = 100,
        fail_always: Iterable[str] = (),
        fail_times: dict[str, int] | None = None,
    ) -> None:
        self.table = dict(table)
        self.fallback = list(fallback)
        self.max_k = max_k
        self._fail_always = set(fail_always)
        self._fail_budget = dict(fail_times or {})
        self._lock = threading.Lock()
        vocab: set[str] = {UNKNOWN_TOKEN, MASK_TOKEN}
        vocab.update(extra_vocab)
        vocab.update(self.fallback)
        for scored in self.table.values():
            vocab.update(token for token, _ in scored)
        self.vocab: tuple[str, ...] = tuple(sorted(vocab))
        self._vocab_set = frozenset(vocab)

    def fill_mask(self, prompt: str, k: int) -> list[tuple[str, float]]:
        with self._lock:
            if prompt in self._fail_always:
                raise MockTransportFailure(prompt)
            budget = self._fail_budget.get(prompt, 0)
            if budget > 0:
                self._fail_budget[prompt] = budget - 1
                raise MockTransportFailure(prompt)
        scored = self.table.get(prompt)
        if scored is None:
            uniform = 1.0 / len(self.fallback) if self.fallback else 0.0
            scored = [(token, uniform) for token in self.fallback]
        return scored[: max(0, k)]

    def tokenize(self, text: str) -> list[str]:
        """Whitespace tokenization against the vocabulary, no sub-words."""
        words = text.split()
        if not words:
            return []
        return [
            word if word in self._vocab_set else UNKNOWN_TOKEN for word in words
        ]


def mock_model_from_lines(lines: Iterable[str], where: str = "<mock>") -> MockModel:
    table: dict[str, list[tuple[str, float]]] = {}
    fallback: list[str] = []
    extra_vocab: list[str] = []
    max_k = 100
    fail_always: list[str] = []
    fail_times: dict[str, int] = {}
    for line_no, raw in enumerate(lines, 1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        location = f"{where} line {line_no}"
        if line.startswith("#"):
            directive, sep, value = line[1:].partition(":")
            directive = directive.strip().lower()
            if sep and directive == "fallback":
                fallback = [t.strip() for t in value.split(",") if t.strip()]
            elif sep and directive == "vocab":
                extra_vocab.extend(t.strip() for t in value.split(",") if t.strip())
            elif sep and directive == "max_k":
                max_k = int(value.strip())
            continue
        prompt, sep, value = line.partition("\t")
        if not sep:
            raise MockFixtureError(f"{location}: expected TAB separator")
        value = value.strip()
        if prompt in table or prompt in fail_always or prompt in fail_times:
            raise MockFixtureError(f"{location}: duplicate prompt {prompt!r}")
        if value == "!transport":
            fail_always.append(prompt)
            table[prompt] = []
            continue
        if value.startswith("!flaky:"):
            head, _, rest = value[len("!flaky:") :].partition(",")
            try:
                fail_times[prompt] = int(head)
            except ValueError as exc:
                raise MockFixtureError(f"{location}: bad flaky count") from exc
            table[prompt] = _parse_scored_list(rest, location)
            continue
        table[prompt] = _parse_scored_list(value, location)
    return MockModel(
        table,
        fallback,
        extra_vocab=extra_vocab,
        max_k=max_k,
        fail_always=fail_always,
        fail_times=fail_times,
    )


def read_mock_model(path: str | Path) -> MockModel:
    path = Path(path)
    with open(path, encoding="utf-8") as fp:
        return mock_model_from_lines(fp, where=str(path))


class _MockHandler(BaseHTTPRequestHandler):
    model: MockModel  # set on the subclass by the server
    page_size: int = VOCAB_PAGE_SIZE

    def log_message(self, *args) -> None:  # keep test output clean
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return {}
        return body if isinstance(body, dict) else {}

    def do_GET(self) -> None:
        path, _, query = self.path.partition("?")
        if path == "/health":
            self._send(200, {"status": "ok", "max_k": self.model.max_k})
        elif path == "/vocab":
            page = 0
            for pair in query.split("&"):
                key, _, value = pair.partition("=")
                if key == "page" and value.isdigit():
                    page = int(value)
            start = page * self.page_size
            tokens = list(self.model.vocab[start : start + self.page_size])
            self._send(200, {"size": len(self.model.vocab), "tokens": tokens})
        else:
            self._send(404, {"error": f"no such endpoint: {path}"})

    def do_POST(self) -> None:
        body = self._read_json()
        if self.path == "/fill-mask":
            prompt = body.get("prompt")
            k = body.get("k", 10)
            if not isinstance(prompt, str) or not isinstance(k, int) or k < 1:
                self._send(400, {"error": "fill-mask needs prompt and k >= 1"})
                return
            try:
                scored = self.model.fill_mask(prompt, k)
            except MockTransportFailure:
                self._send(503, {"error": "backend unavailable"})
                return
            self._send(
                200,
                {
                    "predictions": [
                        {"token": token, "probability": prob}
                        for token, prob in scored
                    ]
                },
            )
        elif self.path == "/tokenize":
            text = body.get("text")
            if not isinstance(text, str):
                self._send(400, {"error": "tokenize needs text"})
                return
            self._send(200, {"tokens": self.model.tokenize(text)})
        else:
            self._send(404, {"error": f"no such endpoint: {self.path}"})


class MockBackendServer:
    """Serves a MockModel over the wire protocol on an ephemeral port."""

    def __init__(self, model: MockModel, page_size: int = VOCAB_PAGE_SIZE) -> None:
        handler = type(
            "BoundMockHandler", (_MockHandler,), {"model": model, "page_size": page_size}
        )
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="mock-backend", daemon=True
        )
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "MockBackendServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
