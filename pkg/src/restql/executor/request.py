"""Parser for the supported GraphQL request subset.

Supported: one query or mutation (the keyword is optional for anonymous
queries), variables with defaults, arguments with any literal, aliases and
nested selections.  Fragments, directives and subscriptions are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..gqllex import GraphQLSyntaxError, TokenStream
from ..schema import TypeExpr
from ..sdl import parse_type_expr


class UnsupportedConstruct(GraphQLSyntaxError):
    def __init__(self, construct: str, line: int, column: int) -> None:
        super().__init__(f"unsupported-construct: {construct}", line, column)
        self.construct = construct


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class EnumValue:
    name: str


@dataclass(frozen=True)
class VariableDef:
    name: str
    type: TypeExpr
    default: Any = None
    has_default: bool = False


@dataclass(frozen=True)
class Selection:
    name: str
    alias: str | None = None
    args: tuple[tuple[str, Any], ...] = ()
    selections: tuple[Selection, ...] | None = None
    line: int = 0
    column: int = 0

    @property
    def key(self) -> str:
        return self.alias or self.name

    def arg_map(self) -> dict[str, Any]:
        return dict(self.args)


@dataclass(frozen=True)
class RequestDoc:
    operation_kind: str  # query | mutation
    selections: tuple[Selection, ...]
    operation_name: str | None = None
    variable_defs: tuple[VariableDef, ...] = ()


def _reject_directive(ts: TokenStream) -> None:
    tok = ts.peek
    if tok.kind == "punct" and tok.value == "@":
        raise UnsupportedConstruct("directives", tok.line, tok.column)


def _value(ts: TokenStream, const: bool = False) -> Any:
    tok = ts.peek
    if tok.kind == "punct" and tok.value == "$":
        if const:
            ts.fail("variables are not allowed here")
        ts.next()
        return Variable(ts.name().value)
    if tok.kind == "int":
        ts.next()
        return int(tok.value)
    if tok.kind == "float":
        ts.next()
        return float(tok.value)
    if tok.kind == "string":
        ts.next()
        return tok.value
    if tok.kind == "name":
        ts.next()
        literals = {"true": True, "false": False, "null": None}
        if tok.value in literals:
            return literals[tok.value]
        return EnumValue(tok.value)
    if ts.accept("["):
        items = []
        while not ts.accept("]"):
            if ts.peek.kind == "eof":
                ts.fail("unterminated list")
            items.append(_value(ts, const))
        return items
    if ts.accept("{"):
        obj: dict[str, Any] = {}
        while not ts.accept("}"):
            name = ts.name()
            if name.value in obj:
                ts.fail(f"duplicate input field {name.value!r}", name)
            ts.expect(":")
            obj[name.value] = _value(ts, const)
        return obj
    ts.fail(f"expected a value, found {tok.value or 'end of input'!r}")


def _selection_set(ts: TokenStream) -> tuple[Selection, ...]:
    ts.expect("{")
    out = []
    while not ts.accept("}"):
        tok = ts.peek
        if tok.kind == "spread":
            raise UnsupportedConstruct("fragments", tok.line, tok.column)
        first = ts.name()
        alias = None
        name = first
        if ts.accept(":"):
            alias = first.value
            name = ts.name()
        args: list[tuple[str, Any]] = []
        if ts.accept("("):
            seen = set()
            while not ts.accept(")"):
                aname = ts.name()
                if aname.value in seen:
                    ts.fail(f"duplicate argument {aname.value!r}", aname)
                seen.add(aname.value)
                ts.expect(":")
                args.append((aname.value, _value(ts)))
            if not args:
                ts.fail("empty argument list")
        _reject_directive(ts)
        subs = _selection_set(ts) if ts.at("{") else None
        out.append(Selection(name.value, alias, tuple(args), subs, first.line, first.column))
    if not out:
        ts.fail("empty selection set")
    return tuple(out)


def parse_request(text: str) -> RequestDoc:
    """Parse a request document; raises GraphQLSyntaxError with a position."""
    ts = TokenStream(text)
    kind, name, var_defs = "query", None, []
    tok = ts.peek
    if tok.kind == "name":
        if tok.value == "subscription":
            raise UnsupportedConstruct("subscription", tok.line, tok.column)
        if tok.value == "fragment":
            raise UnsupportedConstruct("fragments", tok.line, tok.column)
        if tok.value not in ("query", "mutation"):
            ts.fail(f"expected 'query', 'mutation' or '{{', found {tok.value!r}")
        kind = ts.next().value
        if ts.peek.kind == "name":
            name = ts.next().value
        if ts.accept("("):
            seen = set()
            while not ts.accept(")"):
                ts.expect("$")
                vname = ts.name()
                if vname.value in seen:
                    ts.fail(f"duplicate variable ${vname.value}", vname)
                seen.add(vname.value)
                ts.expect(":")
                vtype = parse_type_expr(ts)
                if ts.accept("="):
                    var_defs.append(VariableDef(vname.value, vtype, _value(ts, const=True), True))
                else:
                    var_defs.append(VariableDef(vname.value, vtype))
        _reject_directive(ts)
    selections = _selection_set(ts)
    extra = ts.peek
    if extra.kind != "eof":
        if extra.kind == "name" and extra.value in ("query", "mutation", "subscription", "fragment") or extra.value == "{":
            what = "fragments" if extra.value == "fragment" else "multiple operations"
            raise UnsupportedConstruct(what, extra.line, extra.column)
        ts.fail(f"unexpected {extra.value!r} after the operation", extra)
    return RequestDoc(kind, selections, name, tuple(var_defs))
