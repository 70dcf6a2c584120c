from __future__ import annotations

import json
import random
import threading
import time
import urllib.error
import urllib.request
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from conftest import gateway, pipeline
from e2e_cases import VALID
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import pruned_shape_ok
from selections import BACKED, random_request

from restql.executor import (
    BackendError,
    BackendRequest,
    FixtureBackend,
    Gateway,
    GatewayServer,
    HttpBackend,
    UnsupportedConstruct,
    execute,
    parse_request,
    validate_request,
)
from restql.fixture_server import FixtureRestServer
from restql.gqllex import GraphQLSyntaxError
from restql.pipeline import corpus_dir

# -- parsing -------------------------------------------------------------------------------


def test_parse_lifecycle_query():
    doc = parse_request('query { getArticle(id: "10") { author title } }')
    assert doc.operation_kind == "query"
    (sel,) = doc.selections
    assert sel.name == "getArticle" and sel.arg_map() == {"id": "10"}
    assert [s.name for s in sel.selections] == ["author", "title"]


def test_parse_anonymous_multi_query():
    doc = parse_request("{ a b }")
    assert doc.operation_kind == "query" and doc.operation_name is None
    assert [s.name for s in doc.selections] == ["a", "b"]


def test_syntax_error_position():
    with pytest.raises(GraphQLSyntaxError) as exc:
        parse_request("query { f(x: }")
    assert (exc.value.line, exc.value.column) == (1, 14)
    with pytest.raises(GraphQLSyntaxError) as exc:
        parse_request("{\n  a(\n    x: 1,\n  ]\n}")
    assert (exc.value.line, exc.value.column) == (4, 3)


def test_fragments_and_directives_are_rejected():
    with pytest.raises(UnsupportedConstruct):
        parse_request("{ a { ...F } } fragment F on T { x }")
    with pytest.raises(UnsupportedConstruct):
        parse_request("{ a @include(if: true) }")


def test_parse_values_variables_and_aliases():
    doc = parse_request('mutation M($v: [Int!] = [1], $o: In) { x: f(a: $v, b: {c: null, d: [true, 1.5, "s", RED]}) }')
    assert doc.operation_kind == "mutation" and doc.operation_name == "M"
    assert [v.name for v in doc.variable_defs] == ["v", "o"]
    sel = doc.selections[0]
    assert (sel.alias, sel.key) == ("x", "x")
    b = sel.arg_map()["b"]
    assert b["c"] is None and b["d"][:3] == [True, 1.5, "s"]


# -- validation -----------------------------------------------------------------------------

BLOG = pipeline("blog.apiir.json").schema


def _rules(text, variables=None, schema=BLOG):
    return [v.rule for v in validate_request(parse_request(text), schema, variables)]


def test_lifecycle_query_is_valid():
    assert _rules('query { getArticle(id: "10") { author title } }') == []


@pytest.mark.parametrize(
    "text,variables,rule",
    [
        ("{ getArticle(id: 1) { wibble } }", None, "unknown-field"),
        ("mutation { addArticle { id } }", None, "missing-argument"),
        ("{ getArticle(id: 1, x: 2) { id } }", None, "unknown-argument"),
        ('{ getArticle(id: true) { id } }', None, "invalid-argument"),
        ("{ getArticle(id: 1) }", None, "missing-selection"),
        ("{ getArticle(id: 1) { id { x } } }", None, "leaf-selection"),
        ("query($i: Long!) { getArticle(id: $i) { id } }", {}, "invalid-variable"),
        ("{ getArticle(id: $i) { id } }", None, "undefined-variable"),
        ("query($i: Long!) { getArticle(id: 1) { id } }", {"i": 1}, "unused-variable"),
        ("query($i: String!) { getArticle(id: $i) { id } }", {"i": "1"}, "variable-type-mismatch"),
        ("query($i: Nope!) { getArticle(id: $i) { id } }", {"i": 1}, "unknown-type"),
        ("{ a: getArticle(id: 1) { id } a: getArticle(id: 2) { id } }", None, "field-conflict"),
        ("{ __schema { types { name } } }", None, "unsupported-construct"),
    ],
)
def test_every_violation_class_is_reachable(text, variables, rule):
    assert rule in _rules(text, variables)


def test_missing_mutation_root():
    schema = pipeline("generics.apiir.json").schema
    assert "missing-root" in _rules("mutation { x }", schema=schema)


# -- execution -----------------------------------------------------------------------------


@pytest.mark.parametrize("case", VALID, ids=lambda c: c.name)
def test_hand_oracle_in_process(case):
    gw, backend = gateway(case.fixture)
    status, out = gw.handle({"query": case.query, "variables": case.variables})
    assert status == 200
    assert out["data"] == case.data
    assert tuple(tuple(e["path"]) for e in out.get("errors", [])) == case.error_paths
    if case.calls is not None:
        assert tuple((f"{r.method} {r.url_suffix()}", r.body) for r in backend.calls) == case.calls


def test_responses_are_deterministic():
    for case in VALID:
        outs = set()
        for _ in range(2):
            gw, _ = gateway(case.fixture)
            outs.add(json.dumps(gw.handle({"query": case.query, "variables": case.variables}), sort_keys=True))
        assert len(outs) == 1, case.name


def test_permuting_roots_permutes_data():
    gw, _ = gateway("generics.apiir.json")
    parts = ['a: getPair(id: 1) { first }', 'b: listUsers { status }', 'c: getUser(id: 1) { data { name } }']
    base = gw.handle({"query": "{ " + " ".join(parts) + " }"})[1]["data"]
    for perm in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
        out = gw.handle({"query": "{ " + " ".join(parts[i] for i in perm) + " }"})[1]["data"]
        assert list(out) == [list(base)[i] for i in perm]
        assert {k: out[k] for k in base} == base


def test_execute_directly():
    r = pipeline("blog.apiir.json")
    backend = FixtureBackend.load(corpus_dir() / "backend" / "blog.backend.json")
    out = execute(parse_request("{ getArticle(id: 10) { title } }"), {}, r.schema, r.manifest, backend)
    assert out == {"data": {"getArticle": {"title": "Why GraphQL"}}}


def test_unreachable_backend_is_a_field_error():
    r = pipeline("blog.apiir.json")
    gw = Gateway(r.schema, r.manifest, HttpBackend("http://127.0.0.1:9", timeout=1))
    status, out = gw.handle({"query": "{ getArticle(id: 10) { title } }"})
    assert status == 200 and out["data"] == {"getArticle": None}
    assert "unreachable" in out["errors"][0]["message"]


def test_backend_config_invariants():
    with pytest.raises(ValueError):
        HttpBackend("http://x", timeout=0)
    with pytest.raises(ValueError):
        FixtureBackend({"GET /a": {"latency_ms": -1}})
    with pytest.raises(BackendError):
        FixtureBackend({}).call(BackendRequest("GET", "/nope"))


def test_fixture_latency_is_safe_concurrently():
    backend = FixtureBackend({"GET /a": {"status": 200, "body": 1, "latency_ms": 50}})
    threads = [threading.Thread(target=backend.call, args=(BackendRequest("GET", "/a"),)) for _ in range(8)]
    start = time.perf_counter()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(backend.calls) == 8
    assert time.perf_counter() - start < 0.35  # sleeps overlap


# -- HTTP surface ----------------------------------------------------------------------------


def _post(url, raw: bytes, headers=None):
    req = urllib.request.Request(url, data=raw, headers={"Content-Type": "application/json", **(headers or {})})
    try:
        with urllib.request.urlopen(req, timeout=5) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read())


def test_server_routes():
    gw, backend = gateway("blog.apiir.json")
    with GatewayServer(gw) as srv:
        status, body = _post(srv.url, json.dumps({"query": "{ getArticle(id: 10) { id } }"}).encode())
        assert (status, body) == (200, {"data": {"getArticle": {"id": 10}}})
        status, body = _post(srv.url, b"{nope")
        assert status == 400 and "malformed JSON" in body["errors"][0]["message"]
        status, body = _post(srv.url, json.dumps({"query": "{ getArticle(id: 10) { wibble } }"}).encode())
        assert status == 400 and body["errors"][0]["extensions"]["rule"] == "unknown-field"
        with urllib.request.urlopen(srv.url.replace("/graphql", "/healthz")) as resp:
            assert resp.read() == b"ok"
    assert len(backend.calls) == 1


class _HeaderEcho(BaseHTTPRequestHandler):
    seen: list = []

    def log_message(self, *args):
        pass

    def do_GET(self):
        _HeaderEcho.seen.append(dict(self.headers.items()))
        data = json.dumps({"id": 1, "title": "t"}).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def test_configured_headers_pass_through_unmodified():
    upstream = ThreadingHTTPServer(("127.0.0.1", 0), _HeaderEcho)
    threading.Thread(target=upstream.serve_forever, daemon=True).start()
    try:
        r = pipeline("blog.apiir.json")
        backend = HttpBackend(f"http://127.0.0.1:{upstream.server_address[1]}", pass_headers=("Authorization",))
        gw = Gateway(r.schema, r.manifest, backend, pass_headers=("Authorization",))
        with GatewayServer(gw) as srv:
            raw = json.dumps({"query": "{ getArticle(id: 3) { title } }"}).encode()
            status, body = _post(srv.url, raw, {"Authorization": "Bearer a.b.c", "X-Secret": "no"})
        assert (status, body) == (200, {"data": {"getArticle": {"title": "t"}}})
        (seen,) = _HeaderEcho.seen
        assert seen["Authorization"] == "Bearer a.b.c"
        assert "X-Secret" not in seen
    finally:
        upstream.shutdown()
        upstream.server_close()


def test_gateway_over_rest_fixture_server():
    """Gateway -> HTTP -> fixture server gives the same answers as in-process."""
    for case in VALID[:4]:
        gw, backend = gateway(case.fixture)
        with FixtureRestServer(backend) as rest:
            remote = Gateway(gw.schema, gw.manifest, HttpBackend(rest.base_url))
            status, out = remote.handle({"query": case.query, "variables": case.variables})
        assert status == 200 and out["data"] == case.data, case.name


# -- pruning property ------------------------------------------------------------------------


def test_random_requests_are_valid_and_pruned():
    rnd = random.Random(7)
    for i in range(60):
        name = BACKED[i % len(BACKED)]
        text, variables, shape = random_request(name, rnd)
        gw, _ = gateway(name)
        status, out = gw.handle({"query": text, "variables": variables})
        assert status == 200, (text, out)
        assert list(out["data"]) == [k for k, _ in shape]
        assert all(pruned_shape_ok(out["data"][k], sub) for k, sub in shape), text


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(BACKED), st.integers(0, 2**32))
def test_pruning_property(name, seed):
    text, variables, shape = random_request(name, random.Random(seed))
    gw, _ = gateway(name)
    status, out = gw.handle({"query": text, "variables": variables})
    assert status == 200
    assert pruned_shape_ok(out["data"], shape)
