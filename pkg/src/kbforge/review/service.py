"""HTTP JSON API over the campaign store.

Routes:

    POST /campaigns                          {"tasks": [task payloads]}
    GET  /campaigns/{id}/next?annotator=a
    POST /campaigns/{id}/votes               {vote payload}
    GET  /campaigns/{id}/agreement?a=x&b=y   (a/b optional with two annotators)
    GET  /campaigns/{id}/export?policy=strict|plausible
    GET  /campaigns/{id}/summary
    GET  /health

All bodies are UTF-8 JSON; failures come back as {"code", "message"}
with code not-found (404), conflict (409), or validation (400). Writes
funnel through the store's single appender; reads never take its lock.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .store import ReviewError, ReviewStore, export_accepted, task_from_payload, task_to_payload, vote_from_payload

_STATUS_BY_CODE = {"not-found": 404, "validation": 400, "conflict": 409}


class _ReviewHandler(BaseHTTPRequestHandler):
    store: ReviewStore

    # quiet request logging; tests assert on payloads, not stderr chatter
    def log_message(self, fmt: str, *args) -> None:
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _fail(self, code: str, message: str) -> None:
        self._send(_STATUS_BY_CODE.get(code, 400), {"code": code, "message": message})

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ReviewError("validation", f"request body is not JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ReviewError("validation", "request body must be a JSON object")
        return payload

    def _campaign_route(self, path: str) -> tuple[str, str] | None:
        parts = [p for p in path.split("/") if p]
        if len(parts) == 3 and parts[0] == "campaigns":
            return parts[1], parts[2]
        return None

    def do_GET(self) -> None:
        url = urlsplit(self.path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            if url.path == "/health":
                self._send(200, {"status": "ok"})
                return
            route = self._campaign_route(url.path)
            if route is None:
                self._fail("not-found", f"no such route: {url.path}")
                return
            campaign_id, action = route
            if action == "next":
                annotator = (query.get("annotator") or "").strip()
                if not annotator:
                    raise ReviewError("validation", "annotator query parameter required")
                task = self.store.next_task(campaign_id, annotator)
                self._send(200, {"task": None if task is None else task_to_payload(task)})
            elif action == "agreement":
                snapshot = self.store.campaign(campaign_id)
                a, b = query.get("a"), query.get("b")
                if not (a and b):
                    annotators = snapshot.annotators
                    if len(annotators) != 2:
                        raise ReviewError(
                            "validation",
                            "pass a= and b= unless exactly two annotators voted",
                        )
                    a, b = annotators
                exact, binary = self.store.agreement_between(campaign_id, a, b)
                self._send(
                    200,
                    {
                        "annotators": [a, b],
                        "exact": exact,
                        "binary": binary,
                        "n_tasks": len(snapshot.votes_by(a)),
                    },
                )
            elif action == "export":
                policy = query.get("policy", "strict")
                snapshot = self.store.campaign(campaign_id)
                assertions, summary = export_accepted(snapshot, policy)
                self._send(
                    200,
                    {"policy": policy, "assertions": assertions, "summary": summary},
                )
            elif action == "summary":
                self._send(200, self.store.summary(campaign_id))
            else:
                self._fail("not-found", f"no such route: {url.path}")
        except ReviewError as exc:
            self._fail(exc.code, exc.message)

    def do_POST(self) -> None:
        url = urlsplit(self.path)
        try:
            if url.path == "/campaigns":
                payload = self._read_json()
                raw_tasks = payload.get("tasks")
                if not isinstance(raw_tasks, list):
                    raise ReviewError("validation", "tasks must be a JSON array")
                tasks = [task_from_payload(item) for item in raw_tasks]
                campaign_id, created = self.store.create_campaign(tasks)
                self._send(
                    201 if created else 200,
                    {"campaign_id": campaign_id, "n_tasks": len(tasks)},
                )
                return
            route = self._campaign_route(url.path)
            if route and route[1] == "votes":
                campaign_id = route[0]
                vote = vote_from_payload(self._read_json())
                self.store.submit_vote(campaign_id, vote)
                self._send(200, {"accepted": True})
                return
            self._fail("not-found", f"no such route: {url.path}")
        except ReviewError as exc:
            self._fail(exc.code, exc.message)


class ReviewServer:
    """Serves one ReviewStore on an ephemeral local port."""

    def __init__(self, store: ReviewStore, host: str = "127.0.0.1", port: int = 0) -> None:
        handler = type("BoundReviewHandler", (_ReviewHandler,), {"store": store})
        self._server = ThreadingHTTPServer((host, port), handler)
        # a short poll makes shutdown() prompt, which test suites feel
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05),
            name="review-service",
            daemon=True,
        )
        self.store = store

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ReviewServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "ReviewServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def serve_review(log_path: str | Path, host: str, port: int) -> ReviewServer:
    """Open (or resume) the event log at ``log_path`` and serve it."""
    store = ReviewStore(log_path)
    server = ReviewServer(store, host=host, port=port)
    return server.start()
