"""Structural GraphQL rules for a :class:`~restql.schema.SchemaDoc`."""

from __future__ import annotations

from .defmodel import BUILTIN_SCALARS, NAME_RE, Violation
from .schema import (
    EnumType,
    GqlField,
    InputObjectType,
    InterfaceType,
    ObjectType,
    ScalarType,
    SchemaDoc,
    named_of,
    strip_non_null,
)

RULES = (
    "undefined-reference",
    "duplicate-name",
    "duplicate-field",
    "empty-object",
    "empty-input",
    "empty-enum",
    "input-position-misuse",
    "output-position-misuse",
    "bad-name",
    "reserved-name",
    "missing-query-root",
    "bad-implements",
)


def _good_name(name: str) -> bool:
    return bool(NAME_RE.match(name)) and not name.startswith("__")


def validate_schema(schema: SchemaDoc) -> list[Violation]:
    """Every broken rule, as ``Violation(rule, subject)``; empty when valid."""
    out: list[Violation] = []
    seen: dict[str, object] = {}
    roots = {"Query"} if schema.has_query else set()
    if schema.mutation:
        roots.add("Mutation")
    for t in schema.types:
        if t.name in seen or t.name in roots:
            out.append(Violation("duplicate-name", t.name))
        seen.setdefault(t.name, t)
        if not _good_name(t.name):
            out.append(Violation("bad-name", t.name))
        if t.name in BUILTIN_SCALARS:
            out.append(Violation("reserved-name", t.name))

    if not schema.has_query:
        out.append(Violation("missing-query-root", "Query"))

    def known(name: str) -> bool:
        return name in BUILTIN_SCALARS or name in seen or name in roots

    def check_fields(owner: str, fields: tuple[GqlField, ...], output: bool) -> None:
        names = [f.name for f in fields]
        for dup in sorted({n for n in names if names.count(n) > 1}):
            out.append(Violation("duplicate-field", f"{owner}.{dup}"))
        for f in fields:
            subject = f"{owner}.{f.name}"
            if not _good_name(f.name):
                out.append(Violation("bad-name", subject))
            check_ref(subject, named_of(f.type), output)
            anames = [a.name for a in f.args]
            for dup in sorted({n for n in anames if anames.count(n) > 1}):
                out.append(Violation("duplicate-field", f"{subject}({dup})"))
            for a in f.args:
                if not _good_name(a.name):
                    out.append(Violation("bad-name", f"{subject}({a.name})"))
                check_ref(f"{subject}({a.name})", named_of(a.type), False)

    def check_ref(subject: str, name: str, output: bool) -> None:
        if not known(name):
            out.append(Violation("undefined-reference", f"{subject} -> {name}"))
            return
        target = seen.get(name)
        if output and isinstance(target, InputObjectType):
            out.append(Violation("output-position-misuse", f"{subject} -> {name}"))
        if not output and (name in roots or isinstance(target, (ObjectType, InterfaceType))):
            out.append(Violation("input-position-misuse", f"{subject} -> {name}"))

    for t in schema.types:
        if isinstance(t, (ObjectType, InterfaceType)):
            if not t.fields:
                out.append(Violation("empty-object", t.name))
            check_fields(t.name, t.fields, output=True)
        if isinstance(t, ObjectType):
            own = {f.name: f for f in t.fields}
            for iname in t.interfaces:
                iface = seen.get(iname)
                if not isinstance(iface, InterfaceType):
                    out.append(Violation("bad-implements", f"{t.name} -> {iname}"))
                    continue
                for f in iface.fields:
                    mine = own.get(f.name)
                    if mine is None or strip_non_null(mine.type) != strip_non_null(f.type):
                        out.append(Violation("bad-implements", f"{t.name}.{f.name} -> {iname}"))
        elif isinstance(t, InputObjectType):
            if not t.fields:
                out.append(Violation("empty-input", t.name))
            check_fields(t.name, t.fields, output=False)
            for f in t.fields:
                if f.args:
                    out.append(Violation("bad-name", f"{t.name}.{f.name} (input fields take no arguments)"))
        elif isinstance(t, EnumType):
            if not t.values:
                out.append(Violation("empty-enum", t.name))
            for v in t.values:
                if not _good_name(v) or v in ("true", "false", "null"):
                    out.append(Violation("bad-name", f"{t.name}.{v}"))
            if len(set(t.values)) != len(t.values):
                out.append(Violation("duplicate-field", t.name))
        elif isinstance(t, ScalarType):
            pass

    if schema.has_query:
        if not schema.query:
            out.append(Violation("empty-object", "Query"))
        check_fields("Query", schema.query, output=True)
    check_fields("Mutation", schema.mutation, output=True)
    return out
