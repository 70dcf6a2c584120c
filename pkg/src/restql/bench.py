"""Under-fetching benchmark: N dependent REST calls vs one nested GraphQL request.

Latency model: every client-facing hop (client -> REST service, client ->
gateway) costs ``latency_ms``.  The gateway reaches a co-located copy of the
REST service with no injected latency, so a chain of N dependent lookups costs
the REST client N hops and the GraphQL client one.
"""

from __future__ import annotations

import json
import time
import urllib.request
from dataclasses import dataclass
from typing import Any

from .executor.backend import FixtureBackend, HttpBackend
from .executor.server import Gateway, GatewayServer
from .fixture_server import FixtureRestServer
from .pipeline import convert, corpus_config, corpus_dir


@dataclass(frozen=True)
class BenchConfig:
    chain: int = 5
    latency_ms: float = 50.0
    trials: int = 5

    def __post_init__(self) -> None:
        if self.chain < 1:
            raise ValueError("chain length must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.latency_ms < 0:
            raise ValueError("latency must be >= 0")


@dataclass(frozen=True)
class BenchRow:
    chain: int
    rest_ms: float
    graphql_ms: float

    @property
    def ratio(self) -> float:
        return self.rest_ms / self.graphql_ms if self.graphql_ms else float("inf")


@dataclass(frozen=True)
class BenchReport:
    config: BenchConfig
    rows: tuple[BenchRow, ...]
    elapsed_s: float

    def row(self, chain: int) -> BenchRow:
        return next(r for r in self.rows if r.chain == chain)

    def format(self) -> str:
        lines = [f"{'chain':>5}  {'REST ms':>9}  {'GraphQL ms':>10}  {'ratio':>6}"]
        for r in self.rows:
            lines.append(f"{r.chain:>5}  {r.rest_ms:>9.1f}  {r.graphql_ms:>10.1f}  {r.ratio:>6.2f}")
        lines.append(
            f"latency {self.config.latency_ms:g} ms/call, {self.config.trials} trials, total {self.elapsed_s:.1f} s"
        )
        return "\n".join(lines) + "\n"


def chain_fixtures(length: int, latency_ms: float = 0.0) -> dict[str, Any]:
    """Fixture for ``GET /steps/{id}``: step i points at step i+1; the last has no successor."""
    steps = [{"id": i, "value": f"step-{i}", "nextId": i + 1 if i < length else None} for i in range(1, length + 1)]
    return {
        "GET /steps/{id}": {
            "status": 404,
            "body": {"error": "no such step"},
            "latency_ms": latency_ms,
            "responses": [{"when": {"id": s["id"]}, "status": 200, "body": s} for s in steps],
        }
    }


def chain_query(length: int) -> str:
    """Nested selection that resolves ``length`` steps in one request."""
    inner = "id value"
    for _ in range(length - 1):
        inner = f"id value next {{ {inner} }}"
    return f"{{ getStep(id: 1) {{ {inner} }} }}"


def chain_depth(step: dict[str, Any] | None) -> int:
    n = 0
    while step:
        n += 1
        step = step.get("next")
    return n


def _get_json(url: str) -> Any:
    with urllib.request.urlopen(url, timeout=30) as resp:
        return json.loads(resp.read())


def _post_json(url: str, payload: Any) -> Any:
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), method="POST", headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req, timeout=30) as resp:
        return json.loads(resp.read())


def rest_chain(base_url: str, length: int) -> list[dict[str, Any]]:
    """Client-side resolution: each call needs the previous response."""
    out, next_id = [], 1
    while next_id is not None and len(out) < length:
        step = _get_json(f"{base_url}/steps/{next_id}")
        out.append(step)
        next_id = step.get("nextId")
    return out


def graphql_chain(url: str, length: int) -> dict[str, Any]:
    body = _post_json(url, {"query": chain_query(length)})
    if body.get("errors"):
        raise RuntimeError(f"gateway returned errors: {body['errors']}")
    return body["data"]["getStep"]


def _timed(fn, *args) -> tuple[float, Any]:
    start = time.perf_counter()
    result = fn(*args)
    return (time.perf_counter() - start) * 1000.0, result


def run_bench(config: BenchConfig) -> BenchReport:
    started = time.perf_counter()
    fixtures = chain_fixtures(config.chain)
    client_facing = FixtureBackend(chain_fixtures(config.chain, config.latency_ms))
    colocated = FixtureBackend(fixtures)
    result = convert(corpus_dir() / "chain.apiir.json", "apiir", corpus_config())

    with FixtureRestServer(client_facing) as rest, FixtureRestServer(colocated) as upstream:
        gateway = Gateway(
            result.schema, result.manifest, HttpBackend(upstream.base_url), request_latency_ms=config.latency_ms
        )
        with GatewayServer(gateway) as gql:
            # warm-up round, discarded
            rest_chain(rest.base_url, config.chain)
            graphql_chain(gql.url, config.chain)

            rows = []
            for n in range(1, config.chain + 1):
                rest_times, gql_times = [], []
                for _ in range(config.trials):
                    ms, steps = _timed(rest_chain, rest.base_url, n)
                    if len(steps) != n:
                        raise RuntimeError(f"REST chain resolved {len(steps)} steps, expected {n}")
                    rest_times.append(ms)
                    ms, root = _timed(graphql_chain, gql.url, n)
                    if chain_depth(root) != n:
                        raise RuntimeError(f"GraphQL chain resolved {chain_depth(root)} steps, expected {n}")
                    gql_times.append(ms)
                rows.append(BenchRow(n, sum(rest_times) / len(rest_times), sum(gql_times) / len(gql_times)))

    return BenchReport(config, tuple(rows), time.perf_counter() - started)
