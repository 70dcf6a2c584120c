"""HTTP endpoint: ``POST /graphql`` and ``GET /healthz``."""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from ..generator import BindingManifest
from ..gqllex import GraphQLSyntaxError
from ..schema import SchemaDoc
from .backend import BackendAdapter
from .engine import execute
from .request import parse_request
from .validation import validate_request

log = logging.getLogger("restql.server")


@dataclass(frozen=True)
class Gateway:
    schema: SchemaDoc
    manifest: BindingManifest
    backend: BackendAdapter
    pass_headers: tuple[str, ...] = ()
    # simulated client<->gateway network cost, added once per request
    request_latency_ms: float = 0.0

    def handle(self, payload: Any, headers: dict[str, str] | None = None) -> tuple[int, dict[str, Any]]:
        """Status code and JSON body for one decoded request payload."""
        if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
            return 400, {"errors": [{"message": "request body must be a JSON object with a string 'query'"}]}
        variables = payload.get("variables") or {}
        if not isinstance(variables, dict):
            return 400, {"errors": [{"message": "'variables' must be a JSON object"}]}
        try:
            doc = parse_request(payload["query"])
        except GraphQLSyntaxError as exc:
            return 400, {"errors": [{"message": str(exc), "locations": [{"line": exc.line, "column": exc.column}]}]}
        violations = validate_request(doc, self.schema, variables)
        if violations:
            return 400, {"errors": [{"message": str(v), "extensions": {"rule": v.rule}} for v in violations]}
        allowed = {h.lower() for h in self.pass_headers}
        forwarded = {k: v for k, v in (headers or {}).items() if k.lower() in allowed}
        return 200, execute(doc, variables, self.schema, self.manifest, self.backend, forwarded)


class _Handler(BaseHTTPRequestHandler):
    gateway: Gateway
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args: Any) -> None:
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body: Any, content_type: str = "application/json") -> None:
        data = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self) -> None:
        if self.path == "/healthz":
            self._send(200, b"ok", "text/plain")
        else:
            self._send(404, {"errors": [{"message": f"no route for GET {self.path}"}]})

    def do_POST(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        if self.path != "/graphql":
            self._send(404, {"errors": [{"message": f"no route for POST {self.path}"}]})
            return
        if self.gateway.request_latency_ms:
            time.sleep(self.gateway.request_latency_ms / 1000.0)
        try:
            payload = json.loads(raw or b"null")
        except json.JSONDecodeError as exc:
            self._send(400, {"errors": [{"message": f"malformed JSON body: {exc.msg}"}]})
            return
        status, body = self.gateway.handle(payload, dict(self.headers.items()))
        self._send(status, body)


class GatewayServer:
    """Threaded server wrapper usable as a context manager."""

    def __init__(self, gateway: Gateway, host: str = "127.0.0.1", port: int = 0) -> None:
        handler = type("GatewayHandler", (_Handler,), {"gateway": gateway})
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}/graphql"

    def start(self) -> GatewayServer:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()

    def __enter__(self) -> GatewayServer:
        return self.start()

    def __exit__(self, *exc: Any) -> None:
        self.stop()


def serve(schema: SchemaDoc, manifest: BindingManifest, backend: BackendAdapter, port: int, pass_headers: tuple[str, ...] = ()) -> None:
    """Serve until interrupted."""
    server = GatewayServer(Gateway(schema, manifest, backend, pass_headers), port=port)
    log.info("serving GraphQL on http://127.0.0.1:%d/graphql", server.port)
    try:
        server.httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.httpd.server_close()
