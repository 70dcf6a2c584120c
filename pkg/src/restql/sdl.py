"""SDL printing and reading for :class:`~restql.schema.SchemaDoc`."""

from __future__ import annotations

from .gqllex import GraphQLSyntaxError, TokenStream
from .schema import (
    EnumType,
    GqlArg,
    GqlField,
    InputObjectType,
    InterfaceType,
    ListType,
    NamedType,
    NonNullType,
    ObjectType,
    SECTION_ORDER,
    ScalarType,
    SchemaDoc,
    TypeExpr,
)

__all__ = ["print_sdl", "parse_sdl", "parse_type_expr", "GraphQLSyntaxError"]


def _field_line(f: GqlField) -> str:
    args = ""
    if f.args:
        args = "(" + ", ".join(f"{a.name}: {a.type}" for a in f.args) + ")"
    return f"  {f.name}{args}: {f.type}"


def _block(head: str, lines: list[str]) -> str:
    return head + " {\n" + "\n".join(lines) + "\n}"


def _decl(t) -> str:
    if isinstance(t, ScalarType):
        return f"scalar {t.name}"
    if isinstance(t, EnumType):
        return _block(f"enum {t.name}", [f"  {v}" for v in t.values])
    if isinstance(t, InterfaceType):
        return _block(f"interface {t.name}", [_field_line(f) for f in t.fields])
    if isinstance(t, ObjectType):
        impl = f" implements {' & '.join(t.interfaces)}" if t.interfaces else ""
        return _block(f"type {t.name}{impl}", [_field_line(f) for f in t.fields])
    if isinstance(t, InputObjectType):
        return _block(f"input {t.name}", [f"  {f.name}: {f.type}" for f in t.fields])
    raise TypeError(t)


def print_sdl(schema: SchemaDoc) -> str:
    """Deterministic SDL: sections in fixed order, names sorted within each."""
    blocks = []
    for kind in SECTION_ORDER:
        members = sorted((t for t in schema.types if type(t) is kind), key=lambda t: t.name)
        blocks.extend(_decl(t) for t in members)
    if schema.has_query:
        blocks.append(_block("type Query", [_field_line(f) for f in schema.query]))
    if schema.mutation:
        blocks.append(_block("type Mutation", [_field_line(f) for f in schema.mutation]))
    return "\n\n".join(blocks) + "\n"


def parse_type_expr(ts: TokenStream) -> TypeExpr:
    if ts.accept("["):
        inner: TypeExpr = ListType(parse_type_expr(ts))
        ts.expect("]")
    else:
        inner = NamedType(ts.name().value)
    if ts.accept("!"):
        return NonNullType(inner)
    return inner


def _skip_description(ts: TokenStream) -> None:
    while ts.peek.kind == "string":
        ts.next()


def _fields(ts: TokenStream, with_args: bool) -> tuple[GqlField, ...]:
    fields = []
    if not ts.accept("{"):
        return ()
    while not ts.accept("}"):
        _skip_description(ts)
        name = ts.name().value
        args = []
        if with_args and ts.accept("("):
            while not ts.accept(")"):
                _skip_description(ts)
                aname = ts.name().value
                ts.expect(":")
                args.append(GqlArg(aname, parse_type_expr(ts)))
                if ts.at("="):
                    ts.fail("argument default values are not supported")
        ts.expect(":")
        fields.append(GqlField(name, parse_type_expr(ts), tuple(args)))
        if ts.at("@"):
            ts.fail("directives are not supported")
    return tuple(fields)


def parse_sdl(text: str) -> SchemaDoc:
    """Read the SDL subset produced by :func:`print_sdl`."""
    ts = TokenStream(text)
    decls = []
    roots: dict[str, tuple[GqlField, ...]] = {}
    while ts.peek.kind != "eof":
        _skip_description(ts)
        kw = ts.name()
        if kw.value == "scalar":
            decls.append(ScalarType(ts.name().value))
        elif kw.value == "enum":
            name = ts.name().value
            values = []
            ts.expect("{")
            while not ts.accept("}"):
                _skip_description(ts)
                values.append(ts.name().value)
            decls.append(EnumType(name, tuple(values)))
        elif kw.value in ("type", "interface"):
            name = ts.name().value
            interfaces = []
            if ts.accept("implements", "name"):
                ts.accept("&")
                interfaces.append(ts.name().value)
                while ts.accept("&"):
                    interfaces.append(ts.name().value)
            fields = _fields(ts, with_args=True)
            if kw.value == "interface":
                decls.append(InterfaceType(name, fields))
            elif name in ("Query", "Mutation") and name not in roots and not interfaces:
                roots[name] = fields
            else:
                decls.append(ObjectType(name, fields, tuple(interfaces)))
        elif kw.value == "input":
            name = ts.name().value
            decls.append(InputObjectType(name, _fields(ts, with_args=False)))
        else:
            ts.fail(f"unsupported definition {kw.value!r}", kw)
    return SchemaDoc(
        types=tuple(decls),
        query=roots.get("Query", ()),
        mutation=roots.get("Mutation", ()),
        has_query="Query" in roots,
    )
