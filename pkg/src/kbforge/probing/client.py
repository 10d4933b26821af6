"""HTTP fill-mask backend client and batched probing.

The wire protocol is four endpoints with UTF-8 JSON bodies:
POST /fill-mask {prompt, k} -> {predictions: [{token, probability}]};
GET /vocab?page=N -> {size, tokens}; POST /tokenize {text} -> {tokens};
GET /health -> {status}. Transport failures are retried with exponential
backoff; malformed responses are protocol errors and never retried.
Returned probabilities are validated but never renormalized, so
calibrated thresholds stay comparable across runs.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import requests

from ..core.types import (
    EntityRef,
    KbforgeError,
    Prediction,
    PredictionSet,
    RelationSpec,
)
from .prompts import instantiate_prompt

DEFAULT_K = 10
DEFAULT_MAX_K = 10
PROBABILITY_SUM_SLACK = 1e-6

RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.2

# server errors that signal an unavailable backend rather than a bad request
_RETRYABLE_STATUS = {502, 503, 504}


class TransportError(KbforgeError):
    """The backend could not be reached; safe to retry."""


class ProtocolError(KbforgeError):
    """The backend answered with something the protocol does not allow."""


@dataclass(frozen=True)
class BackendDescriptor:
    endpoint: str
    vocab_size: int
    max_k: int

    def __post_init__(self) -> None:
        if self.vocab_size < 1:
            raise KbforgeError(f"vocab_size must be >= 1: {self.vocab_size}")
        if self.max_k < 1:
            raise KbforgeError(f"max_k must be >= 1: {self.max_k}")


class BackendClient:
    """Client for one fill-mask backend; shareable across worker threads."""

    def __init__(
        self,
        base_url: str,
        session: requests.Session | None = None,
        timeout: float = 30.0,
        retries: int = RETRY_ATTEMPTS,
        backoff_s: float = RETRY_BACKOFF_S,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self._session = session if session is not None else requests.Session()
        self._timeout = timeout
        self._retries = max(1, retries)
        self._backoff_s = backoff_s
        self._sleep = sleep
        self._vocab: frozenset[str] | None = None

    def _request(self, method: str, path: str, **kwargs) -> dict:
        url = f"{self.base_url}{path}"
        delay = self._backoff_s
        last_error: Exception | None = None
        for attempt in range(self._retries):
            if attempt:
                self._sleep(delay)
                delay *= 2
            try:
                response = self._session.request(
                    method, url, timeout=self._timeout, **kwargs
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = TransportError(
                    f"{url} -> {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise ProtocolError(f"{url} -> {response.status_code}")
            try:
                body = response.json()
            except ValueError as exc:
                raise ProtocolError(f"{url}: response is not JSON") from exc
            if not isinstance(body, dict):
                raise ProtocolError(f"{url}: response is not an object")
            return body
        raise TransportError(
            f"{url} unreachable after {self._retries} attempts: {last_error}"
        )

    def health(self) -> dict:
        return self._request("GET", "/health")

    def fill_mask(self, prompt: str, k: int = DEFAULT_K) -> list[Prediction]:
        """Top-k predictions, validated against the protocol contract."""
        if k < 1:
            raise KbforgeError(f"k must be >= 1: {k}")
        body = self._request("POST", "/fill-mask", json={"prompt": prompt, "k": k})
        raw = body.get("predictions")
        if not isinstance(raw, list):
            raise ProtocolError("fill-mask response lacks a predictions list")
        if len(raw) > k:
            raise ProtocolError(f"asked for k={k}, got {len(raw)} predictions")
        predictions = []
        total = 0.0
        previous = 1.0
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise ProtocolError(f"prediction {i} is not an object")
            token = item.get("token")
            probability = item.get("probability")
            if not isinstance(token, str) or not isinstance(
                probability, (int, float)
            ):
                raise ProtocolError(f"prediction {i} is malformed: {item!r}")
            if not 0.0 <= probability <= 1.0:
                raise ProtocolError(f"probability out of range: {probability}")
            if probability > previous:
                raise ProtocolError("probabilities are not non-increasing")
            previous = probability
            total += probability
            predictions.append(Prediction(token, float(probability), i + 1))
        if total > 1.0 + PROBABILITY_SUM_SLACK:
            raise ProtocolError(f"probabilities sum to {total}")
        return predictions

    def tokenize(self, text: str) -> list[str]:
        body = self._request("POST", "/tokenize", json={"text": text})
        tokens = body.get("tokens")
        if not isinstance(tokens, list) or not all(
            isinstance(t, str) for t in tokens
        ):
            raise ProtocolError("tokenize response lacks a tokens list")
        return tokens

    def vocab(self) -> frozenset[str]:
        """Full vocabulary, paged fetch, cached for the client's lifetime."""
        if self._vocab is None:
            tokens: list[str] = []
            page = 0
            while True:
                body = self._request("GET", f"/vocab?page={page}")
                page_tokens = body.get("tokens")
                if not isinstance(page_tokens, list):
                    raise ProtocolError("vocab response lacks a tokens list")
                tokens.extend(page_tokens)
                size = body.get("size")
                if not isinstance(size, int):
                    raise ProtocolError("vocab response lacks a size")
                if not page_tokens or len(tokens) >= size:
                    break
                page += 1
            self._vocab = frozenset(tokens)
        return self._vocab

    def in_vocab(self, label: str) -> bool:
        """True iff the label tokenizes to exactly one real vocabulary token.

        The token must also round-trip the label (case-insensitively), so
        an unknown-token placeholder never counts as coverage.
        """
        tokens = self.tokenize(label)
        return (
            len(tokens) == 1
            and tokens[0] in self.vocab()
            and tokens[0].casefold() == label.strip().casefold()
        )

    def descriptor(self) -> BackendDescriptor:
        health = self.health()
        max_k = health.get("max_k")
        return BackendDescriptor(
            endpoint=self.base_url,
            vocab_size=len(self.vocab()),
            max_k=max_k if isinstance(max_k, int) else DEFAULT_MAX_K,
        )


def probe_batch(
    items: Sequence,
    specs: Mapping[str, RelationSpec] | Sequence[RelationSpec],
    client: BackendClient,
    k: int = DEFAULT_K,
    window: int = 8,
) -> list[PredictionSet]:
    """One PredictionSet per item, in item order; failures never abort.

    Items need a ``subject`` EntityRef and a ``relation`` property id
    (benchmark records and fact-candidate stubs both qualify). A query
    that still fails after retries yields an empty set annotated with the
    error, keeping the record in evaluation denominators.
    """
    by_pid = (
        {spec.pid: spec for spec in specs}
        if not isinstance(specs, Mapping)
        else specs
    )
    for item in items:
        if item.relation not in by_pid:
            raise KbforgeError(f"no relation spec for {item.relation}")

    def probe_one(item) -> PredictionSet:
        subject: EntityRef = item.subject
        key = (subject.id, item.relation)
        try:
            query = instantiate_prompt(by_pid[item.relation], subject.label, key)
            predictions = client.fill_mask(query.prompt, k)
        except KbforgeError as exc:
            return PredictionSet(key, (), error=str(exc))
        return PredictionSet(key, tuple(predictions))

    if not items:
        return []
    if window <= 1 or len(items) == 1:
        return [probe_one(item) for item in items]
    with ThreadPoolExecutor(max_workers=window) as pool:
        return list(pool.map(probe_one, items))


def shared_vocab_predicate(client: BackendClient) -> Callable[[str], bool]:
    """A label predicate bound to this client, for dataset statistics."""
    return client.in_vocab
