"""Backend adapters: live HTTP REST services or in-memory fixtures."""

from __future__ import annotations

import json
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Protocol


class BackendError(Exception):
    """The backend could not be reached or answered with a non-2xx status."""

    def __init__(self, message: str, status: int | None = None) -> None:
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class BackendRequest:
    method: str
    path_template: str
    path_params: tuple[tuple[str, Any], ...] = ()
    query: tuple[tuple[str, Any], ...] = ()
    body: Any = None
    has_body: bool = False
    headers: tuple[tuple[str, str], ...] = ()

    @property
    def path(self) -> str:
        out = self.path_template
        for name, value in self.path_params:
            out = out.replace("{" + name + "}", urllib.parse.quote(_text(value), safe=""))
        return out

    @property
    def key(self) -> str:
        return f"{self.method} {self.path_template}"

    def url_suffix(self) -> str:
        if not self.query:
            return self.path
        pairs = []
        for k, v in self.query:
            for item in v if isinstance(v, list) else [v]:
                pairs.append((k, _text(item)))
        return self.path + "?" + urllib.parse.urlencode(pairs)


def _text(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class BackendResponse:
    status: int
    body: Any


class BackendAdapter(Protocol):
    def call(self, request: BackendRequest) -> BackendResponse: ...


@dataclass
class HttpBackend:
    base_url: str
    timeout: float = 10.0
    pass_headers: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("http timeout must be positive")
        self.base_url = self.base_url.rstrip("/")

    def call(self, request: BackendRequest) -> BackendResponse:
        data = None
        headers = {"Accept": "application/json"}
        allowed = {h.lower() for h in self.pass_headers}
        headers.update({k: v for k, v in request.headers if k.lower() in allowed})
        if request.has_body:
            data = json.dumps(request.body).encode()
            headers["Content-Type"] = "application/json"
        req = urllib.request.Request(self.base_url + request.url_suffix(), data=data, method=request.method, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                raw = resp.read()
                status = resp.status
        except urllib.error.HTTPError as exc:
            raw, status = exc.read(), exc.code
        except (urllib.error.URLError, OSError) as exc:
            raise BackendError(f"backend unreachable: {exc}") from exc
        body = json.loads(raw) if raw.strip() else None
        return BackendResponse(status, body)


@dataclass
class FixtureBackend:
    """Canned responses keyed by ``"<METHOD> <path-template>"``.

    Each entry is ``{status, body, latency_ms}``, optionally with a
    ``responses`` list whose items add a ``when`` object matched against the
    call's path and query parameters (first match wins, the entry itself is
    the fallback).  ``latency_ms`` is slept per call, which is how network
    cost is simulated.
    """

    fixtures: Mapping[str, Any]
    default_latency_ms: float = 0.0
    calls: list[BackendRequest] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self) -> None:
        if self.default_latency_ms < 0:
            raise ValueError("fixture latency must be >= 0")
        for key, entry in self.fixtures.items():
            if float(entry.get("latency_ms", 0)) < 0:
                raise ValueError(f"fixture {key!r} has negative latency")

    @classmethod
    def load(cls, path: str | Path, default_latency_ms: float = 0.0) -> FixtureBackend:
        return cls(json.loads(Path(path).read_text(encoding="utf-8")), default_latency_ms)

    def call(self, request: BackendRequest) -> BackendResponse:
        with self._lock:
            self.calls.append(request)
        entry = self.fixtures.get(request.key)
        if entry is None:
            raise BackendError(f"no fixture for {request.key}", 404)
        chosen = entry
        params = {k: _text(v) for k, v in request.path_params + request.query}
        for alt in entry.get("responses", ()):
            if all(params.get(k) == _text(v) for k, v in alt.get("when", {}).items()):
                chosen = {**entry, **alt}
                break
        latency = float(chosen.get("latency_ms", self.default_latency_ms))
        if latency:
            time.sleep(latency / 1000.0)
        body = chosen.get("body")
        if chosen.get("echo") and request.has_body:
            body = request.body
        return BackendResponse(int(chosen.get("status", 200)), json.loads(json.dumps(body)))

    def reset(self) -> None:
        with self._lock:
            self.calls.clear()
