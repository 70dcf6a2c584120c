from __future__ import annotations

import json

import pytest
from conftest import pipeline
from hypothesis import given
from hypothesis import strategies as st

from restql.defmodel import (
    BUILTIN_SCALARS,
    EXTENDED_SCALARS,
    NAME_RE,
    DefModel,
    EnumDef,
    FieldDef,
    ListDef,
    LiteralDef,
    MapEntryDef,
    NamingError,
    NonNullDef,
    ObjectDef,
    OperationDef,
    RenameRecord,
    RwsDef,
    ScalarKind,
    TypeRef,
    VoidDef,
    canonical_name,
    non_null,
    normalize_name,
    validate_defmodel,
)

STRING = LiteralDef(ScalarKind.of("String"))
INT = LiteralDef(ScalarKind.of("Int"))


def _model_with_output(t) -> DefModel:
    return DefModel(operations=[OperationDef("f", "s#f()", (), t, RwsDef.READ)])


def test_scalar_sets_are_fixed():
    assert BUILTIN_SCALARS == ("Int", "Float", "String", "Boolean", "ID")
    assert set(EXTENDED_SCALARS) == {
        "Long", "Double", "Char", "Byte", "Short", "BigInteger", "BigDecimal", "DateTime", "Date", "Time",
    }
    assert not set(BUILTIN_SCALARS) & set(EXTENDED_SCALARS)


def test_scalar_kind_categories():
    assert ScalarKind.of("Int").category == "builtin"
    assert ScalarKind.of("Long").category == "extended"
    assert ScalarKind.of("Money").category == "custom"
    with pytest.raises(ValueError):
        ScalarKind("Long", "custom")
    with pytest.raises(ValueError):
        ScalarKind("Money", "builtin")
    with pytest.raises(ValueError):
        ScalarKind("bad-name", "custom")


def test_nested_non_null_is_reported():
    violations = validate_defmodel(_model_with_output(NonNullDef(NonNullDef(STRING))))
    assert [v.rule for v in violations] == ["nested non-null"]


def test_dangling_ref_is_reported():
    violations = validate_defmodel(_model_with_output(TypeRef("Ghost")))
    assert [(v.rule, v.subject) for v in violations] == [("unresolved reference", "f -> Ghost")]


def test_other_invariants():
    assert [v.rule for v in validate_defmodel(_model_with_output(ListDef(VoidDef())))] == ["list of void"]
    entry = MapEntryDef(INT, STRING, "IntStringEntry")
    m = _model_with_output(entry)
    m.types["IntStringEntry"] = entry
    assert [v.rule for v in validate_defmodel(m)] == ["map entry outside list"]
    m = DefModel(types={"E": EnumDef("E", ("A", "A"))})
    assert [v.rule for v in validate_defmodel(m)] == ["duplicate enum value"]
    m = DefModel(types={"O": ObjectDef("O", "x.O", (FieldDef("a", INT), FieldDef("a", STRING)))})
    assert [v.rule for v in validate_defmodel(m)] == ["duplicate field"]
    m = DefModel(rename_log=[RenameRecord("type", "a.X", "X"), RenameRecord("type", "b.X", "X")])
    assert [v.rule for v in validate_defmodel(m)] == ["rename log not injective"]


def test_aliased_instantiation_is_reported():
    a = ObjectDef("BoxOfInt", "g.Box", (FieldDef("v", INT),), (INT,))
    b = ObjectDef("BoxOfInt", "g.Box", (FieldDef("v", STRING),), (STRING,))
    rules = {v.rule for v in validate_defmodel(DefModel(types={"BoxOfInt": a, "BoxOfString": b}))}
    assert "aliased instantiation" in rules


def test_duplicate_operation_per_rws():
    op = OperationDef("get", "s#get()", (), STRING, RwsDef.READ)
    assert [v.rule for v in validate_defmodel(DefModel(operations=[op, op]))] == ["duplicate operation"]
    write = OperationDef("get", "s#get2()", (), STRING, RwsDef.WRITE)
    assert validate_defmodel(DefModel(operations=[op, write])) == []


def test_blog_model_is_valid():
    assert validate_defmodel(pipeline("blog.apiir.json").model) == []


def test_non_null_never_nests_or_wraps_void():
    assert non_null(non_null(STRING)) == NonNullDef(STRING)
    assert non_null(VoidDef()) == VoidDef()


def test_canonical_names():
    user_w = ObjectDef("User", "com.w.User", (FieldDef("id", INT),))
    assert canonical_name(user_w, qualified=True) == "com_w_User"
    assert canonical_name(user_w) == "User"
    assert canonical_name((INT, STRING)) == "IntStringEntry"
    assert "ListOf" + canonical_name(MapEntryDef(INT, STRING, "IntStringEntry")) == "ListOfIntStringEntry"
    resp = ObjectDef("ResponseOfUser", "com.example.Response", (), (TypeRef("User"),))
    assert canonical_name(resp) == "ResponseOfUser"
    pair = ObjectDef("x", "g.Pair", (), (INT, ListDef(STRING)))
    assert canonical_name(pair) == "PairOfIntListOfString"


def test_name_normalization():
    assert normalize_name("com.w.User") == "com_w_User"
    assert normalize_name("9lives") == "_9lives"
    assert normalize_name("Outer$Inner") == "Outer_Inner"
    with pytest.raises(NamingError):
        normalize_name("$$$")
    with pytest.raises(NamingError):
        normalize_name("")


@given(st.text(alphabet="abcXYZ019._$-", min_size=1, max_size=24))
def test_normalized_names_match_grammar(raw):
    expected = "".join(c if c.isalnum() else "_" for c in raw)
    if expected[0].isdigit():
        expected = "_" + expected
    if not any(c.isalnum() for c in raw) or expected.startswith("__"):
        with pytest.raises(NamingError):
            normalize_name(raw)
        return
    name = normalize_name(raw)
    assert name == expected
    assert NAME_RE.match(name)


def test_model_json_is_canonical():
    model = pipeline("blog.apiir.json").model
    text = model.to_json()
    assert text == pipeline("blog.apiir.json").model.to_json()
    data = json.loads(text)
    assert [op["name"] for op in data["operations"]] == ["getArticle", "addArticle"]
    assert data["operations"][0]["rws"] == "READ"
    assert json.dumps(data, sort_keys=True, separators=(",", ":")) == text
