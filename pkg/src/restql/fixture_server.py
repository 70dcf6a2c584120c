"""Serve a fixture file as a REST API over HTTP (used by the benchmark)."""

from __future__ import annotations

import json
import re
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .executor.backend import BackendError, BackendRequest, FixtureBackend


def _route_pattern(template: str) -> re.Pattern[str]:
    parts = re.split(r"(\{[^}]+\})", template)
    regex = "".join(f"(?P<{p[1:-1]}>[^/]+)" if p.startswith("{") else re.escape(p) for p in parts)
    return re.compile(f"^{regex}$")


class FixtureRestServer:
    """``with FixtureRestServer(backend) as srv: srv.base_url``"""

    def __init__(self, backend: FixtureBackend, host: str = "127.0.0.1", port: int = 0) -> None:
        self.backend = backend
        self.routes = []
        for key in backend.fixtures:
            method, template = key.split(" ", 1)
            self.routes.append((method, template, _route_pattern(template)))
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt: str, *args: Any) -> None:
                pass

            def _handle(self) -> None:
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b""
                status, body = server.dispatch(self.command, self.path, raw)
                data = b"" if body is None else json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            do_GET = do_POST = do_PUT = do_PATCH = do_DELETE = _handle

        self.httpd = ThreadingHTTPServer((host, port), Handler)
        self.httpd.daemon_threads = True

    def dispatch(self, method: str, raw_path: str, raw_body: bytes) -> tuple[int, Any]:
        parsed = urllib.parse.urlsplit(raw_path)
        path = urllib.parse.unquote(parsed.path)
        for m, template, pattern in self.routes:
            match = pattern.match(path)
            if m == method and match:
                request = BackendRequest(
                    method,
                    template,
                    tuple(match.groupdict().items()),
                    tuple(urllib.parse.parse_qsl(parsed.query)),
                    json.loads(raw_body) if raw_body else None,
                    bool(raw_body),
                )
                try:
                    resp = self.backend.call(request)
                except BackendError as exc:
                    return exc.status or 502, {"error": str(exc)}
                return resp.status, resp.body
        return 404, {"error": f"no route for {method} {path}"}

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.httpd.server_address[1]}"

    def __enter__(self) -> FixtureRestServer:
        threading.Thread(target=self.httpd.serve_forever, daemon=True).start()
        return self

    def __exit__(self, *exc: Any) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
