from __future__ import annotations

import pytest

from restql.bench import BenchConfig, BenchReport, BenchRow, chain_depth, chain_fixtures, chain_query, run_bench
from restql.executor import BackendRequest, FixtureBackend, parse_request


@pytest.mark.parametrize("kwargs", [{"chain": 0}, {"trials": 0}, {"latency_ms": -0.5}])
def test_config_rejects_nonsense(kwargs):
    with pytest.raises(ValueError):
        BenchConfig(**kwargs)


def test_chain_query_nests_once_per_step():
    assert chain_query(1) == "{ getStep(id: 1) { id value } }"
    assert chain_query(3) == "{ getStep(id: 1) { id value next { id value next { id value } } } }"
    parse_request(chain_query(10))


def test_chain_depth():
    assert chain_depth(None) == 0
    assert chain_depth({"id": 1, "next": {"id": 2, "next": None}}) == 2


def test_chain_fixture_links_steps():
    backend = FixtureBackend(chain_fixtures(3))
    bodies = [backend.call(BackendRequest("GET", "/steps/{id}", (("id", i),))) for i in (1, 2, 3, 4)]
    assert [b.body.get("nextId") for b in bodies[:3]] == [2, 3, None]
    assert bodies[3].status == 404


def test_ratio_and_format():
    report = BenchReport(BenchConfig(2, 10, 1), (BenchRow(1, 10.0, 10.0), BenchRow(2, 20.0, 10.0)), 0.5)
    assert report.row(2).ratio == 2.0
    assert BenchRow(1, 1.0, 0.0).ratio == float("inf")
    assert report.format().splitlines()[2].split() == ["2", "20.0", "10.0", "2.00"]


def test_small_run_follows_latency_model():
    # REST pays one 20 ms hop per step, GraphQL one hop per request
    report = run_bench(BenchConfig(chain=3, latency_ms=20, trials=1))
    assert [r.chain for r in report.rows] == [1, 2, 3]
    for r in report.rows:
        assert r.rest_ms >= 20 * r.chain
        assert 20 <= r.graphql_ms < 20 * r.chain + 40
    assert report.row(3).ratio > 1.5
