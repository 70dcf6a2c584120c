from __future__ import annotations

from dataclasses import replace

import pytest
from conftest import pipeline

from restql.diagnostics import MappingCause
from restql.metrics import compare_types, expected_scalar, format_metrics, measure
from restql.pipeline import corpus_config
from restql.schema import GqlField, NamedType, NonNullType, ObjectType
from restql.surface import Primitive


@pytest.mark.parametrize(
    "name,fmt,scalar",
    [("integer", "int64", "Long"), ("integer", None, "Int"), ("number", "double", "Double"), ("integer", "uint128", "Unmapped"),
     ("string", "uuid", "String"), ("string", "date-time", "DateTime"), ("number", "FLOAT", "Float")],
)
def test_expected_scalar(name, fmt, scalar):
    assert expected_scalar(Primitive(name, fmt)) == scalar


@pytest.mark.parametrize("mode", ["strict", "non-strict"])
def test_corpus_has_no_type_mismatches(corpus_names, mode):
    for name in corpus_names:
        report = compare_types(pipeline(name, mode), corpus_config(mode))
        assert report.mismatches == (), (name, [str(m) for m in report.mismatches])
        assert report.checked_operations == len(pipeline(name, mode).model.operations)


def _retype(result, type_name, field_name, new_type):
    types = tuple(
        replace(t, fields=tuple(replace(f, type=new_type) if f.name == field_name else f for f in t.fields))
        if isinstance(t, ObjectType) and t.name == type_name else t
        for t in result.schema.types
    )
    return replace(result, schema=replace(result.schema, types=types))


def test_narrowed_scalar_is_detected():
    r = pipeline("blog.apiir.json")
    bad = _retype(r, "Article", "id", NonNullType(NamedType("Int")))
    (m,) = compare_types(bad, corpus_config()).mismatches
    assert m.subject == "query.getArticle.id" and "expected scalar Long" in m.detail


def test_map_as_scalar_and_dropped_field_are_detected():
    r = pipeline("mapvoid.apiir.json")
    bad = _retype(r, "Stock", "quantities", NamedType("String"))
    assert any("map must become a list" in m.detail for m in compare_types(bad, corpus_config()).mismatches)
    stock = r.schema.type("Stock")
    types = tuple(replace(t, fields=t.fields[1:]) if t is stock else t for t in r.schema.types)
    dropped = replace(r, schema=replace(r.schema, types=types))
    details = {m.detail for m in compare_types(dropped, corpus_config()).mismatches}
    assert "source field missing from schema type" in details


def test_void_must_stay_boolean():
    r = pipeline("mapvoid.apiir.json")
    mutation = tuple(replace(f, type=NamedType("String")) if f.name == "deleteStock" else f for f in r.schema.mutation)
    bad = replace(r, schema=replace(r.schema, mutation=mutation))
    assert [m.detail for m in compare_types(bad, corpus_config()).mismatches] == ["void must be a nullable Boolean"]


def test_measure_and_format():
    strict = pipeline("conflicts.apiir.json", "strict")
    row = measure("conflicts", strict, corpus_config("strict"))
    assert (row.operations, row.converted, row.skipped, row.invalid_schema, row.type_mismatches) == (4, 2, 2, False, 0)
    assert row.failure_rate == 0.5 and row.causes[MappingCause.CONFLICT] == 2
    lax = measure("blog", pipeline("blog.apiir.json"), corpus_config())
    text = format_metrics([row, lax])
    lines = text.splitlines()
    assert lines[0].split() == ["fixture", "ops", "converted", "failure", "invalid", "mismatch", "Conflict", "Invalid", "Unknown", "Missing"]
    assert lines[1].split()[:6] == ["conflicts", "4", "2", "50%", "no", "0"]
    assert lines[2].split()[:6] == ["blog", "2", "2", "0%", "no", "0"]


def test_unused_field_type_is_not_a_mismatch():
    # extra schema fields with no source counterpart are not checked
    r = pipeline("blog.apiir.json")
    art = r.schema.type("Article")
    types = tuple(replace(t, fields=t.fields + (GqlField("extra", NamedType("String")),)) if t is art else t for t in r.schema.types)
    assert compare_types(replace(r, schema=replace(r.schema, types=types)), corpus_config()).mismatches == ()
