from __future__ import annotations

import random

import pytest
from conftest import pipeline
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from oracles import (
    TYPE_FIDELITY,
    greedy_strict_skips,
    model_accepts,
    sample_value,
    source_accepts,
    to_entry_form,
)
from strategies import typed_source

from restql.defmodel import (
    DefModel,
    EnumDef,
    FieldDef,
    InterfaceDef,
    ListDef,
    LiteralDef,
    MapEntryDef,
    NonNullDef,
    ObjectDef,
    RwsDef,
    ScalarKind,
    TypeRef,
    VoidDef,
    validate_defmodel,
)
from restql.diagnostics import MappingCause
from restql.pipeline import corpus_config
from restql.processor import (
    Candidate,
    ConfigError,
    MappingIssue,
    ProcessorConfig,
    classify_operation,
    detect_conflicts,
    map_type,
    map_type_in,
    mitigate,
    monomorphize,
    process,
    unwrap_wrapper,
)
from restql.schema_validation import validate_schema
from restql.surface import (
    ApiSurface,
    ListOf,
    MapOf,
    Named,
    NullableMarker,
    Opaque,
    Primitive,
    Service,
    SourceField,
    SourceLocation,
    SourceMethod,
    SourceOperation,
    SourceParam,
    TypeDecl,
    Void,
)
from restql.translator import translate

STRICT = ProcessorConfig(mode="strict")
LOOSE = ProcessorConfig(mode="non-strict")


def lit(name: str) -> LiteralDef:
    return LiteralDef(ScalarKind.of(name))


def _op(name, method="GET", returns=Primitive("string"), params=(), path=None):
    return SourceOperation(name, method, path or f"/{name}", tuple(params), returns, SourceLocation("A.java", 1))


# -- config and classification ------------------------------------------------------


def test_config_invariants():
    with pytest.raises(ConfigError):
        ProcessorConfig(mode="lenient")
    with pytest.raises(ConfigError):
        ProcessorConfig(wrapper_names=("a.W", "a.W"))
    with pytest.raises(ConfigError):
        ProcessorConfig(recursion_depth_limit=1)
    with pytest.raises(ConfigError):
        ProcessorConfig.from_mapping({"mode": "strict", "colour": "red"})
    cfg = ProcessorConfig.from_mapping({"mode": "strict", "wrappers": ["a.W"], "custom_scalars": {"a.Money": "Money"}, "depth_limit": 8})
    assert cfg.strict and cfg.wrapper_names == ("a.W",) and cfg.custom_scalar("a.Money") == "Money"


@pytest.mark.parametrize("method,rws", [("GET", RwsDef.READ), ("DELETE", RwsDef.WRITE), ("PATCH", RwsDef.WRITE), ("POST", RwsDef.WRITE), ("PUT", RwsDef.WRITE)])
def test_classify_operation(method, rws):
    assert classify_operation(method) is rws


# -- wrappers ------------------------------------------------------------------------

WRAP = ProcessorConfig(wrapper_names=("org.ResponseEntity",))


def test_unwrap_configured_wrapper():
    customer = Named("com.Customer")
    assert unwrap_wrapper(Named("org.ResponseEntity", (customer,)), WRAP) == customer
    assert unwrap_wrapper(customer, WRAP) == customer
    with pytest.raises(MappingIssue) as exc:
        unwrap_wrapper(Named("org.ResponseEntity"), WRAP)
    assert exc.value.cause is MappingCause.INVALID


def _fixed_point_unwrap(t, wrappers):
    while isinstance(t, Named) and t.name in wrappers and len(t.args) == 1:
        t = t.args[0]
    return t


@given(st.integers(0, 6), st.sampled_from([Named("com.User"), ListOf(Named("org.ResponseEntity", (Primitive("string"),))), Primitive("boolean")]))
def test_nested_wrappers_unwrap_to_fixed_point(depth, core):
    t = core
    for _ in range(depth):
        t = Named("org.ResponseEntity", (t,))
    log = []
    assert unwrap_wrapper(t, WRAP, log) == _fixed_point_unwrap(t, {"org.ResponseEntity"})
    assert len(log) == depth


# -- conflicts and mitigation --------------------------------------------------------


def test_detect_conflicts_examples():
    groups = detect_conflicts([Candidate("type", "com.w.User", "User"), Candidate("type", "com.z.User", "User")])
    assert [(g.kind, len(g.members)) for g in groups] == [("type", 2)]
    groups = detect_conflicts(
        [Candidate("operation", "s#get(integer)", "get", "integer", "query"), Candidate("operation", "s#get(string)", "get", "string", "query")]
    )
    assert [(g.kind, g.name) for g in groups] == [("overload", "get")]
    assert detect_conflicts([Candidate("type", "a.X", "X"), Candidate("type", "a.Y", "Y")]) == []
    assert [g.kind for g in detect_conflicts([Candidate("type", "z.Query", "Query")])] == ["reserved"]


def test_mitigate_examples():
    m = mitigate("get(Integer)", MappingCause.CONFLICT, "non-strict", rename_to="getUsingIntegerReturnsUser")
    assert (m.action, m.skipped) == ("rename", False) and "getUsingIntegerReturnsUser" in m.strategy
    m = mitigate("Marker", MappingCause.INVALID, "non-strict", field_less=True)
    assert m.action == "synthesize-field" and "_empty" in m.strategy
    assert mitigate("x", MappingCause.UNKNOWN, "non-strict").action == "substitute-scalar"
    assert "declaration" in mitigate("x", MappingCause.MISSING, "non-strict").strategy
    for cause in MappingCause:
        assert mitigate("x", cause, "strict").skipped


# -- type mapping ----------------------------------------------------------------------


def test_map_type_examples():
    assert map_type(MapOf(Primitive("integer"), Primitive("string"))) == ListDef(MapEntryDef(lit("Int"), lit("String"), "IntStringEntry"))
    assert map_type(ListOf(ListOf(Primitive("string")))) == ListDef(ListDef(lit("String")))
    assert map_type(Void()) == VoidDef()
    assert map_type(NullableMarker(Primitive("string"), True)) == NonNullDef(lit("String"))
    assert map_type(NullableMarker(Primitive("string"), False)) == lit("String")


@pytest.mark.parametrize("key,scalar", sorted(TYPE_FIDELITY.items(), key=str))
def test_scalar_table_never_widens(key, scalar):
    assert map_type(Primitive(*key)) == lit(scalar)


def test_objects_interfaces_and_enums():
    decls = {
        "a.Pet": TypeDecl("object", fields=(SourceField("name", Primitive("string"), True), SourceField("cache", Primitive("string"), transient=True))),
        "a.Kind": TypeDecl("enum", values=("CAT", "DOG")),
        "a.Named": TypeDecl("interface", operations=(SourceMethod("name", Primitive("string")),)),
        "a.Dog": TypeDecl("object", fields=(SourceField("name", Primitive("string")),), implements=("a.Named",)),
    }
    t, model = map_type_in(Named("a.Pet"), decls)
    assert t == TypeRef("Pet")
    assert model.types["Pet"] == ObjectDef("Pet", "a.Pet", (FieldDef("name", NonNullDef(lit("String")), "name"),))
    t, model = map_type_in(Named("a.Kind"), decls)
    assert model.types["Kind"] == EnumDef("Kind", ("CAT", "DOG"), "a.Kind")
    t, model = map_type_in(Named("a.Named"), decls)
    assert model.types["Named"] == InterfaceDef("Named", (FieldDef("name", lit("String"), "name"),), "a.Named")
    assert model.types["Dog"].interfaces == ("Named",)


def test_recursive_types_map_to_refs():
    decls = {"a.Node": TypeDecl("object", fields=(SourceField("next", Named("a.Node")), SourceField("v", Primitive("integer"))))}
    t, model = map_type_in(Named("a.Node"), decls)
    assert model.types["Node"].fields[0].type == TypeRef("Node")


# Every SourceType variant is either mapped or raises a classified cause.
_VARIANTS = [
    (Primitive("integer", "int128"), MappingCause.UNKNOWN),
    (Named("a.Ghost"), MappingCause.MISSING),
    (Named("a.Empty"), MappingCause.INVALID),
    (Opaque("oneOf"), MappingCause.UNKNOWN),
    (MapOf(ListOf(Primitive("string")), Primitive("string")), MappingCause.INVALID),
    (Named("a.Box"), MappingCause.INVALID),  # arity mismatch
    (Named("a.Box", (Named("a.Ghost"),)), MappingCause.MISSING),
    (Primitive("string", "uuid"), None),
    (Named("a.Box", (Primitive("string"),)), None),
]
_VARIANT_DECLS = {
    "a.Empty": TypeDecl("object"),
    "a.Box": TypeDecl("object", fields=(SourceField("v", Named("T")),), type_params=("T",)),
}


@pytest.mark.parametrize("t,cause", _VARIANTS, ids=lambda x: str(x)[:40])
def test_every_variant_is_mapped_or_classified(t, cause):
    if cause is None:
        map_type(t, _VARIANT_DECLS)
    else:
        with pytest.raises(MappingIssue) as exc:
            map_type(t, _VARIANT_DECLS)
        assert exc.value.cause is cause
    # in non-strict mode a nested problem is repaired in place
    mapped, model = map_type_in(ListOf(t), _VARIANT_DECLS, LOOSE)
    assert isinstance(mapped, ListDef) and validate_defmodel(model) == []


def test_depth_limit_is_invalid():
    t = Primitive("string")
    for _ in range(10):
        t = ListOf(t)
    with pytest.raises(MappingIssue) as exc:
        map_type(t, {}, ProcessorConfig(mode="strict", recursion_depth_limit=4))
    assert exc.value.cause is MappingCause.INVALID


# -- monomorphization ---------------------------------------------------------------------

GEN_DECLS = {
    "g.Response": TypeDecl("object", fields=(SourceField("data", Named("T")), SourceField("status", Primitive("integer"), True)), type_params=("T",)),
    "g.Pair": TypeDecl("object", fields=(SourceField("first", Named("A")), SourceField("second", Named("B"))), type_params=("A", "B")),
    "g.Box": TypeDecl("object", fields=(SourceField("v", Named("T")),), type_params=("T",)),
    "g.User": TypeDecl("object", fields=(SourceField("id", Primitive("integer", "int64")),)),
    "g.Address": TypeDecl("object", fields=(SourceField("city", Primitive("string")),)),
    "g.Account": TypeDecl("object", fields=(SourceField("number", Primitive("string")),)),
}


def test_three_response_instantiations_are_distinct():
    holder = TypeDecl(
        "object",
        fields=tuple(SourceField(n.lower(), Named("g.Response", (Named(f"g.{n}"),))) for n in ("User", "Address", "Account")),
    )
    _, model = map_type_in(Named("g.Holder"), {**GEN_DECLS, "g.Holder": holder})
    responses = {n: d for n, d in model.types.items() if isinstance(d, ObjectDef) and d.source_name == "g.Response"}
    assert sorted(responses) == ["ResponseOfAccount", "ResponseOfAddress", "ResponseOfUser"]
    assert responses["ResponseOfUser"].fields[0].type == TypeRef("User")


def test_instantiation_is_memoized():
    holder = TypeDecl("object", fields=(SourceField("a", Named("g.Box", (Primitive("string"),))), SourceField("b", Named("g.Box", (Primitive("string"),)))))
    _, model = map_type_in(Named("g.Holder"), {**GEN_DECLS, "g.Holder": holder})
    assert [n for n, d in model.types.items() if getattr(d, "source_name", "") == "g.Box"] == ["BoxOfString"]
    fields = model.types["Holder"].fields
    assert fields[0].type == fields[1].type == TypeRef("BoxOfString")


def test_pair_substitution_matches_manual_fixture():
    obj, _ = monomorphize("g.Pair", (Primitive("integer"), ListOf(Primitive("string"))), GEN_DECLS)
    # written by hand: A := Int, B := [String]
    assert obj.name == "PairOfIntListOfString"
    assert [(f.name, f.type) for f in obj.fields] == [("first", lit("Int")), ("second", ListDef(lit("String")))]


def test_monomorphize_errors():
    with pytest.raises(MappingIssue) as exc:
        monomorphize("g.Pair", (Primitive("integer"),), GEN_DECLS)
    assert exc.value.cause is MappingCause.INVALID


_ARGS = [Primitive("integer"), Primitive("string"), Primitive("integer", "int64"), ListOf(Primitive("string")), Named("g.User"), ListOf(Named("g.User"))]


def test_monomorphization_is_injective():
    tuples = [(a,) for a in _ARGS] + [(a, b) for a in _ARGS for b in _ARGS]
    fields = []
    for i, args in enumerate(tuples):
        base = "g.Box" if len(args) == 1 else "g.Pair"
        fields.append(SourceField(f"f{i}", Named(base, args)))
    _, model = map_type_in(Named("g.Holder"), {**GEN_DECLS, "g.Holder": TypeDecl("object", fields=tuple(fields))})
    inst = [d for d in model.types.values() if isinstance(d, ObjectDef) and d.type_args]
    assert len(inst) == len(tuples)
    assert len({(d.source_name, d.type_args) for d in inst}) == len(tuples)
    assert validate_defmodel(model) == []


# -- process() examples -----------------------------------------------------------------


def test_blog_non_strict():
    r = pipeline("blog.apiir.json")
    assert [(o.name, o.rws) for o in r.model.operations] == [("getArticle", RwsDef.READ), ("addArticle", RwsDef.WRITE)]
    assert r.diagnostics == []


def test_namespace_conflict_strict_and_non_strict():
    skips = [d for d in pipeline("conflicts.apiir.json", "strict").diagnostics if d.skipped]
    assert sorted(d.trace[0].subject for d in skips) == ["com.w.UserController#get(string)", "com.z.UserController#findMember(integer)"]
    assert all(d.cause is MappingCause.CONFLICT for d in skips)
    loose = pipeline("conflicts.apiir.json")
    assert sorted(loose.model.types) == ["com_w_User", "com_z_User"]
    assert [o.name for o in loose.model.operations] == ["findUser", "getUsingIntegerReturnsUser", "getUsingStringReturnsUser", "findMember"]
    assert loose.skipped == 0


def test_empty_surface():
    r = process(ApiSurface())
    assert r.model.operations == [] and r.model.types == {} and r.diagnostics == []


def test_field_less_object_synthesis_fixes_schema():
    decls = {"a.Marker": TypeDecl("object")}
    surface = ApiSurface((Service("a.S", (_op("getMarker", returns=Named("a.Marker")),)),), decls)
    fixed = process(surface, LOOSE).model
    assert [f.name for f in fixed.types["Marker"].fields] == ["_empty"]
    assert [(s.subject, s.cause) for s in fixed.synthesis_log] == [("a.Marker", "Invalid")]
    assert validate_schema(translate(fixed)) == []
    broken = DefModel(operations=list(fixed.operations), types={"Marker": ObjectDef("Marker", "a.Marker", ())})
    assert [v.rule for v in validate_schema(translate(broken))] == ["empty-object"]
    assert process(surface, STRICT).model.operations == []


def test_process_is_deterministic(corpus_names):
    for name in corpus_names:
        a = pipeline(name)
        b = process(a.surface, corpus_config())
        assert b.model.to_json() == a.model.to_json()


# -- soundness: source values and mapped values coincide ---------------------------------------

@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(typed_source(), st.integers(0, 2**32))
def test_soundness_value_sets_coincide(typed, seed):
    t, decls = typed
    mapped, model = map_type_in(t, decls)
    rnd = random.Random(seed)
    for _ in range(12):
        v = sample_value(t, decls, rnd)
        assert source_accepts(t, v, decls) == model_accepts(mapped, to_entry_form(t, v, decls), model), v


# -- strict accounting against the greedy oracle --------------------------------------------------

_SIMPLE = ["User", "Item", "Order", "Query"]


@st.composite
def _conflicting_surface(draw):
    qnames = draw(st.lists(st.sampled_from([f"{ns}.{s}" for ns in ("a", "b") for s in _SIMPLE]), min_size=1, max_size=5, unique=True))

    def ref():
        choice = draw(st.sampled_from(["prim", "named", "list"]))
        if choice == "prim":
            return Primitive("string")
        target = Named(draw(st.sampled_from(qnames)))
        return target if choice == "named" else ListOf(target)

    decls = {q: TypeDecl("object", fields=tuple(SourceField(f"f{i}", ref()) for i in range(draw(st.integers(1, 2))))) for q in qnames}
    services = []
    n = 0
    for ns in ("a.S", "b.S"):
        ops = []
        for _ in range(draw(st.integers(0, 4))):
            params = tuple(SourceParam(f"p{j}", draw(st.sampled_from([Primitive("string"), Primitive("integer")])), "query", False) for j in range(draw(st.integers(0, 2))))
            ops.append(_op(draw(st.sampled_from(["get", "find", "list"])), draw(st.sampled_from(["GET", "POST"])), ref(), params, f"/op{n}"))
            n += 1
        services.append(Service(ns, tuple(ops)))
    return ApiSurface(tuple(services), decls, {"plugin": "apiir", "source": "A.java"})


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_conflicting_surface())
def test_strict_skips_match_greedy_oracle(surface):
    r = process(surface, STRICT)
    expected = greedy_strict_skips(surface)
    got = [tuple(d.trace[0].subject.split("(")[0].split("#")) for d in r.skipped]
    assert sorted(got) == sorted(expected)
    assert len(r.model.operations) + len(r.skipped) == surface.operation_count
    assert all(d.problems() == [] and d.cause is MappingCause.CONFLICT for d in r.skipped)
    assert validate_defmodel(r.model) == []


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_conflicting_surface(), st.booleans())
def test_non_strict_totality(surface, break_it):
    if break_it:
        # add an unmappable operation of every cause
        extra = Service(
            "c.S",
            (
                _op("opaque", returns=Opaque("anyOf"), path="/c1"),
                _op("ghost", returns=Named("c.Ghost"), path="/c2"),
                _op("wide", returns=Primitive("number", "float128"), path="/c3"),
            ),
        )
        surface = ApiSurface(surface.services + (extra,), {**surface.type_decls, "c.Empty": TypeDecl("object")}, surface.metadata)
    r = process(surface, LOOSE)
    assert len(r.model.operations) == surface.operation_count
    assert r.skipped == []
    assert validate_defmodel(r.model) == []
    assert validate_schema(translate(r.model)) == []
