"""HTTP serving of a masked LM over the probing wire protocol.

Endpoints, all UTF-8 JSON: POST /fill-mask {prompt, k} -> {predictions:
[{token, probability}]}; GET /vocab?page=N -> {size, tokens}; POST
/tokenize {text} -> {tokens}; GET /health -> {status, max_k}. Malformed
requests get a 400 with an {error} body; unknown paths a 404. Model
access is serialized behind one lock, so concurrent clients are safe.

Any model object with ``fill_mask(prompt, k)``, ``tokenize(text)``, and
a ``vocab`` exposing ``tokens`` can be served; prompt problems raised as
ValueError become 400 responses.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

VOCAB_PAGE_SIZE = 5000


class _Handler(BaseHTTPRequestHandler):
    model = None  # bound on the subclass by ModelServer
    page_size: int = VOCAB_PAGE_SIZE
    lock: threading.Lock

    def log_message(self, *args) -> None:  # keep server output quiet
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
            with self.lock:
                size = len(self.model.vocab.tokens)
            self._send(200, {"status": "ok", "max_k": size})
        elif path == "/vocab":
            page = 0
            for pair in query.split("&"):
                key, _, value = pair.partition("=")
                if key == "page" and value.isdigit():
                    page = int(value)
            with self.lock:
                tokens = list(self.model.vocab.tokens)
            start = page * self.page_size
            self._send(
                200,
                {"size": len(tokens), "tokens": tokens[start : start + self.page_size]},
            )
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
                with self.lock:
                    scored = self.model.fill_mask(prompt, k)
            except ValueError as exc:
                self._send(400, {"error": str(exc)})
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
            with self.lock:
                tokens = self.model.tokenize(text)
            self._send(200, {"tokens": tokens})
        else:
            self._send(404, {"error": f"no such endpoint: {self.path}"})


class ModelServer:
    """Serves one model on an ephemeral (or fixed) local port."""

    def __init__(
        self,
        model,
        host: str = "127.0.0.1",
        port: int = 0,
        page_size: int = VOCAB_PAGE_SIZE,
    ) -> None:
        handler = type(
            "BoundHandler",
            (_Handler,),
            {"model": model, "page_size": page_size, "lock": threading.Lock()},
        )
        self._server = ThreadingHTTPServer((host, port), handler)
        self._thread = threading.Thread(
            target=lambda: self._server.serve_forever(poll_interval=0.05),
            name="model-server",
            daemon=True,
        )
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def serve_until_interrupt(self) -> None:
        """Block the calling thread until KeyboardInterrupt, then stop."""
        try:
            while self._thread.is_alive():
                self._thread.join(timeout=0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.close()

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "ModelServer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
