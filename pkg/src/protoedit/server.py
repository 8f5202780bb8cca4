"""HTTP JSON API over one immutable pipeline snapshot.

Endpoints:
  POST /chat    {"context": str, "variant"?: str, "k"?: int} -> EditTrace JSON
  GET  /health  {"status": "ok", "model_hashes": {...}}
  GET  /config  active pipeline configuration

Requests arriving before the models finish loading get 503; an empty context
or unknown variant gets 400. Each served /chat request appends one JSON line
(timestamp, variant, latency ms) to the configured request log.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .pipeline import PipelineConfig, PipelineEngine


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # silence the default stderr chatter
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_OPTIONS(self) -> None:  # CORS preflight for the browser UI
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        engine = self.server.engine  # type: ignore[attr-defined]
        if self.path == "/health":
            if engine is None:
                self._send(503, {"status": "loading"})
            else:
                self._send(200, {"status": "ok", "model_hashes": engine.model_hashes})
        elif self.path == "/config":
            if engine is None:
                self._send(503, {"error": "still loading"})
            else:
                self._send(200, engine.config.to_dict())
        else:
            self._send(404, {"error": f"no such path: {self.path}"})

    def do_POST(self) -> None:
        if self.path != "/chat":
            self._send(404, {"error": f"no such path: {self.path}"})
            return
        engine = self.server.engine  # type: ignore[attr-defined]
        if engine is None:
            self._send(503, {"error": "still loading"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": "invalid JSON body"})
            return
        context = payload.get("context", "")
        if not isinstance(context, str) or not context.strip():
            self._send(400, {"error": "context must be a nonempty string"})
            return
        variant = payload.get("variant")
        k = payload.get("k")
        if k is not None and (not isinstance(k, int) or k < 1):
            self._send(400, {"error": "k must be a positive integer"})
            return
        start = time.perf_counter()
        try:
            trace = engine.respond(context, variant=variant, k=k)
        except ValueError as exc:
            self._send(400, {"error": str(exc)})
            return
        self._send(200, trace.to_dict())
        self.server.log_request_line(  # type: ignore[attr-defined]
            trace.variant, (time.perf_counter() - start) * 1000.0
        )


class ChatServer:
    """Threading HTTP server; the engine snapshot can be swapped atomically."""

    def __init__(self, config: PipelineConfig, engine: PipelineEngine | None = None):
        self.config = config
        self._http = ThreadingHTTPServer((config.host, config.port), _Handler)
        self._http.engine = engine  # type: ignore[attr-defined]
        self._http.log_request_line = self._log_request  # type: ignore[attr-defined]
        self._log_lock = threading.Lock()
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._http.server_address[1]

    def load(self) -> None:
        """Build the engine from config paths and swap it in."""
        self._http.engine = PipelineEngine.from_config(self.config)  # type: ignore[attr-defined]

    def set_engine(self, engine: PipelineEngine) -> None:
        self._http.engine = engine  # type: ignore[attr-defined]

    def _log_request(self, variant: str, latency_ms: float) -> None:
        if not self.config.request_log:
            return
        line = json.dumps(
            {
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                "variant": variant,
                "latency_ms": round(latency_ms, 3),
            }
        )
        with self._log_lock:
            with open(self.config.request_log, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def start(self) -> None:
        """Serve in a background thread (used by tests and the demos)."""
        self._thread = threading.Thread(target=self._http.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._http.serve_forever()

    def shutdown(self) -> None:
        self._http.shutdown()
        self._http.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(config: PipelineConfig, block: bool = True) -> ChatServer:
    """Bind, load models, then serve; requests during load see 503."""
    server = ChatServer(config)
    if block:
        server.load()
        print(f"serving on http://{config.host}:{server.port}")
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            server.shutdown()
    else:
        server.start()
        server.load()
    return server
