from __future__ import annotations

from dataclasses import dataclass, field

import pytest
from conftest import pipeline
from hypothesis import given, settings
from hypothesis import strategies as st

from restql.defmodel import DefModel, FieldDef, ListDef, LiteralDef, MapEntryDef, ObjectDef, ScalarKind, TypeRef
from restql.executor import BackendRequest, BackendResponse, Gateway
from restql.generator import (
    IDENTITY,
    BindingManifest,
    ParamBinding,
    Transform,
    build_object_mapping,
    check_manifest,
    entry_list_to_map,
    generate_bindings,
    map_to_entry_list,
)


def lit(name: str) -> LiteralDef:
    return LiteralDef(ScalarKind.of(name))


def test_blog_bindings():
    m = pipeline("blog.apiir.json").manifest
    b = m.binding("query", "getArticle")
    assert (b.backend.http_method, b.backend.path_template) == ("GET", "/api/articles/{id}")
    assert [(p.gql_arg, p.location, p.source_param) for p in b.backend.param_bindings] == [("id", "path", "id")]
    assert b.result_plan == "Article"
    add = m.binding("mutation", "addArticle")
    assert [(p.gql_arg, p.location) for p in add.backend.param_bindings] == [("articleRequest", "body")]
    assert add.backend.param_bindings[0].transform == Transform("nested", plan="ArticleRequestInput")


def test_renamed_overloads_route_to_original_operations():
    m = pipeline("conflicts.apiir.json").manifest
    assert m.binding("query", "getUsingIntegerReturnsUser").source_id == "com.w.UserController#get(integer)"
    assert m.binding("query", "getUsingStringReturnsUser").source_id == "com.w.UserController#get(string)"
    r = pipeline("conflicts.apiir.json")
    for b in m.bindings:
        op = r.model.operation(b.field, r.model.operations[0].rws)
        assert (b.backend.http_method, b.backend.path_template) == (op.http_method, op.path)


def test_read_only_schema_has_no_mutation_bindings():
    m = pipeline("generics.apiir.json").manifest
    assert pipeline("generics.apiir.json").schema.mutation == ()
    assert all(b.root == "query" for b in m.bindings)


def test_wrapper_extraction_is_recorded():
    m = pipeline("mapvoid.apiir.json").manifest
    assert m.binding("query", "getStock").extract == ("payload",)
    assert m.binding("query", "getCounts").extract == ()


def test_coverage_and_invariants(corpus_names):
    for mode in ("strict", "non-strict"):
        for name in corpus_names:
            r = pipeline(name, mode)
            assert len(r.manifest.bindings) == len(r.schema.query) + len(r.schema.mutation), name
            assert check_manifest(r.manifest, r.schema) == [], name


def test_manifest_json_round_trip(corpus_names):
    for name in corpus_names:
        text = pipeline(name).manifest.to_json()
        again = BindingManifest.from_json(text)
        assert again == pipeline(name).manifest
        assert again.to_json() == text


def test_check_manifest_finds_breaches():
    r = pipeline("blog.apiir.json")
    m = BindingManifest.from_json(r.manifest.to_json())
    m.bindings.pop()
    assert check_manifest(m, r.schema) == ["no binding for mutation.addArticle"]
    m = BindingManifest.from_json(r.manifest.to_json())
    b = m.bindings[0]
    bad = ParamBinding("id", "query", "id", IDENTITY)
    m.bindings[0] = type(b)(b.root, b.field, b.source_id, type(b.backend)("GET", b.backend.path_template, (bad,)), b.result)
    assert any("do not cover" in p for p in check_manifest(m, r.schema))


def test_map_field_plan():
    entry = MapEntryDef(lit("Int"), lit("String"), "IntStringEntry")
    tagged = ObjectDef("Tagged", "x.Tagged", (FieldDef("tags", ListDef(entry)),))
    plan = build_object_mapping(tagged, DefModel(types={"Tagged": tagged, "IntStringEntry": entry}))
    (step,) = plan.steps
    assert step.transform.kind == "map-to-entry-list"
    assert step.transform.plan == "IntStringEntry"
    assert plan.direction == "out"


def test_scalar_only_plan_is_identity():
    obj = ObjectDef("P", "x.P", (FieldDef("a", lit("String")), FieldDef("b", lit("Int")), FieldDef("c", lit("Boolean"))))
    plan = build_object_mapping(obj, DefModel(types={"P": obj}))
    assert [(s.source_field, s.target_field, s.transform) for s in plan.steps] == [("a", "a", IDENTITY), ("b", "b", IDENTITY), ("c", "c", IDENTITY)]


def _plan_graph_acyclic_expansion(manifest: BindingManifest, root: str, limit: int = 1000) -> int:
    """Count plan expansions when following nested references once per name."""
    seen, stack, steps = set(), [root], 0
    while stack:
        name = stack.pop()
        if name in seen:
            continue
        seen.add(name)
        steps += 1
        assert steps < limit
        for s in manifest.mapping_plans[name].steps:
            t = s.transform
            while t is not None:
                if t.plan and t.plan in manifest.mapping_plans:
                    stack.append(t.plan)
                t = t.item or t.value
    return steps


def test_self_referencing_plan():
    node = ObjectDef("Node", "x.Node", (FieldDef("next", TypeRef("Node")), FieldDef("v", lit("Int"))))
    plan = build_object_mapping(node, DefModel(types={"Node": node}))
    assert plan.steps[0].transform == Transform("nested", plan="Node")
    m = pipeline("mapvoid.apiir.json").manifest
    assert m.mapping_plans["Warehouse"].step_for("parent").transform == Transform("nested", plan="Warehouse")
    assert _plan_graph_acyclic_expansion(m, "Stock") == 4  # Stock, two entries, Warehouse


def test_generate_is_deterministic(corpus_names):
    for name in corpus_names:
        r = pipeline(name)
        assert generate_bindings(r.model, r.schema).to_json() == r.manifest.to_json()


# -- map transform inverse ---------------------------------------------------------------

_maps = st.dictionaries(st.integers(-(2**31), 2**31 - 1), st.text(max_size=8), max_size=32)


@settings(max_examples=1000, deadline=None)
@given(_maps)
def test_entry_list_inverse(m):
    assert entry_list_to_map(map_to_entry_list(m)) == m
    assert list(entry_list_to_map(map_to_entry_list(m))) == list(m)


@dataclass
class _Stub:
    body: object = None
    status: int = 200
    calls: list = field(default_factory=list)

    def call(self, request: BackendRequest) -> BackendResponse:
        self.calls.append(request)
        return BackendResponse(self.status, self.body)


@settings(max_examples=150, deadline=None)
@given(_maps)
def test_map_survives_gateway_both_ways(m):
    r = pipeline("mapvoid.apiir.json")
    backend = _Stub({str(k): v for k, v in m.items()})
    gw = Gateway(r.schema, r.manifest, backend)
    status, out = gw.handle({"query": "{ getCounts { key value } }"})
    assert status == 200 and "errors" not in out
    assert entry_list_to_map(out["data"]["getCounts"]) == m

    backend.body, backend.status = None, 204
    entries = [{"key": k, "value": v} for k, v in m.items()]
    query = "mutation($s: StockInput!) { updateStock(sku: \"A\", stock: $s) }"
    status, out = gw.handle({"query": query, "variables": {"s": {"sku": "A", "quantities": entries}}})
    assert status == 200 and out["data"]["updateStock"] is True
    assert backend.calls[-1].body["quantities"] == {str(k): v for k, v in m.items()}


def test_duplicate_entry_keys_keep_last():
    assert entry_list_to_map([{"key": 1, "value": "a"}, {"key": 1, "value": "b"}]) == {1: "b"}


@pytest.mark.parametrize("name", ["store.openapi.json", "petclinic.openapi.yaml"])
def test_openapi_bindings_use_source_params(name):
    r = pipeline(name)
    for b in r.manifest.bindings:
        op = next(o for o in r.model.operations if o.source_id == b.source_id)
        assert [p.source_param for p in b.backend.param_bindings] == [p.wire_name for p in op.params]
