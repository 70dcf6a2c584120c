"""Request validation against a SchemaDoc (runs before any backend call)."""

from __future__ import annotations

from typing import Any, Mapping

from ..defmodel import BUILTIN_SCALARS, Violation
from ..scalars import ScalarError, coerce_input
from ..schema import (
    EnumType,
    GqlField,
    InputObjectType,
    ListType,
    NamedType,
    NonNullType,
    ScalarType,
    SchemaDoc,
    TypeExpr,
    named_of,
)
from .request import EnumValue, RequestDoc, Selection, Variable


class CoercionError(ValueError):
    pass


def _is_input_type(schema: SchemaDoc, expr: TypeExpr) -> bool:
    name = named_of(expr)
    return name in BUILTIN_SCALARS or isinstance(schema.type(name), (ScalarType, EnumType, InputObjectType))


def coerce_value(
    expr: TypeExpr,
    value: Any,
    schema: SchemaDoc,
    variables: Mapping[str, Any] | None = None,
    *,
    from_variable: bool = False,
) -> Any:
    """Coerce a literal (or JSON variable value) to ``expr``; raises CoercionError."""
    if isinstance(value, Variable):
        variables = variables or {}
        if value.name not in variables:
            if isinstance(expr, NonNullType):
                raise CoercionError(f"variable ${value.name} has no value")
            return None
        return coerce_value(expr, variables[value.name], schema, variables, from_variable=True)
    if isinstance(expr, NonNullType):
        if value is None:
            raise CoercionError(f"null for non-null {expr}")
        return coerce_value(expr.of, value, schema, variables, from_variable=from_variable)
    if value is None:
        return None
    if isinstance(expr, ListType):
        items = value if isinstance(value, list) else [value]
        return [coerce_value(expr.of, v, schema, variables, from_variable=from_variable) for v in items]
    name = expr.name
    target = schema.type(name)
    if isinstance(target, EnumType):
        if isinstance(value, EnumValue):
            text = value.name
        elif from_variable and isinstance(value, str):
            text = value
        else:
            raise CoercionError(f"enum {name} expects one of {', '.join(target.values)}, got {value!r}")
        if text not in target.values:
            raise CoercionError(f"{text!r} is not a value of enum {name}")
        return text
    if isinstance(target, InputObjectType):
        if not isinstance(value, dict):
            raise CoercionError(f"input {name} expects an object, got {value!r}")
        fields = {f.name: f for f in target.fields}
        unknown = sorted(set(value) - set(fields))
        if unknown:
            raise CoercionError(f"input {name} has no field {unknown[0]!r}")
        out = {}
        for fname, f in fields.items():
            if fname in value:
                out[fname] = coerce_value(f.type, value[fname], schema, variables, from_variable=from_variable)
            elif isinstance(f.type, NonNullType):
                raise CoercionError(f"input {name} is missing required field {fname!r}")
        return out
    if name in BUILTIN_SCALARS or isinstance(target, ScalarType):
        if isinstance(value, (EnumValue, dict, list)) and not (isinstance(target, ScalarType) and name not in _TYPED_SCALARS):
            raise CoercionError(f"{name} cannot represent {value!r}")
        try:
            return coerce_input(name, _plain(value))
        except ScalarError as exc:
            raise CoercionError(str(exc)) from None
    raise CoercionError(f"{name} is not an input type")


# scalars with a checked lexical form; other custom scalars accept any JSON
_TYPED_SCALARS = set(BUILTIN_SCALARS) | {
    "Long", "Double", "Char", "Byte", "Short", "BigInteger", "BigDecimal", "DateTime", "Date", "Time"
}


def _plain(value: Any) -> Any:
    if isinstance(value, EnumValue):
        return value.name
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    return value


def _var_fits(var_t: TypeExpr, loc_t: TypeExpr, has_default: bool) -> bool:
    if isinstance(loc_t, NonNullType):
        if isinstance(var_t, NonNullType):
            return _var_fits(var_t.of, loc_t.of, False)
        return has_default and _var_fits(var_t, loc_t.of, False)
    if isinstance(var_t, NonNullType):
        return _var_fits(var_t.of, loc_t, False)
    if isinstance(loc_t, ListType):
        return isinstance(var_t, ListType) and _var_fits(var_t.of, loc_t.of, False)
    return isinstance(var_t, NamedType) and var_t.name == loc_t.name


class _Validator:
    def __init__(self, doc: RequestDoc, schema: SchemaDoc, variables: Mapping[str, Any] | None) -> None:
        self.doc = doc
        self.schema = schema
        self.variables = variables or {}
        self.out: list[Violation] = []
        self.var_defs = {v.name: v for v in doc.variable_defs}
        self.used: set[str] = set()

    def add(self, rule: str, subject: str) -> None:
        self.out.append(Violation(rule, subject))

    def run(self) -> list[Violation]:
        for v in self.doc.variable_defs:
            if not _is_input_type(self.schema, v.type):
                self.add("unknown-type", f"${v.name}: {named_of(v.type)}")
                continue
            if v.name in self.variables:
                try:
                    coerce_value(v.type, self.variables[v.name], self.schema, from_variable=True)
                except CoercionError as exc:
                    self.add("invalid-variable", f"${v.name}: {exc}")
            elif v.has_default:
                try:
                    coerce_value(v.type, v.default, self.schema)
                except CoercionError as exc:
                    self.add("invalid-variable", f"${v.name} default: {exc}")
            elif isinstance(v.type, NonNullType):
                self.add("invalid-variable", f"${v.name}: required variable was not provided")
        if self.doc.operation_kind == "mutation":
            if not self.schema.mutation:
                self.add("missing-root", "Mutation")
                return self.out
            root = "Mutation"
        else:
            root = "Query"
        self.selections(root, self.doc.selections)
        for name in sorted(set(self.var_defs) - self.used):
            self.add("unused-variable", f"${name}")
        return self.out

    def selections(self, parent: str, selections: tuple[Selection, ...]) -> None:
        fields = {f.name: f for f in self.schema.fields_of(parent) or ()}
        by_key: dict[str, Selection] = {}
        for sel in selections:
            prior = by_key.get(sel.key)
            if prior is not None and (prior.name != sel.name or prior.args != sel.args):
                self.add("field-conflict", f"{parent}.{sel.key}")
            by_key.setdefault(sel.key, sel)
            if sel.name.startswith("__"):
                if sel.name == "__typename":
                    if sel.args or sel.selections is not None:
                        self.add("leaf-selection", f"{parent}.__typename")
                    continue
                self.add("unsupported-construct", sel.name)
                continue
            f = fields.get(sel.name)
            if f is None:
                self.add("unknown-field", f"{parent}.{sel.name}")
                continue
            self.arguments(parent, f, sel)
            target = named_of(f.type)
            if self.schema.is_leaf(target):
                if sel.selections is not None:
                    self.add("leaf-selection", f"{parent}.{sel.name}")
            elif sel.selections is None:
                self.add("missing-selection", f"{parent}.{sel.name}")
            else:
                self.selections(target, sel.selections)

    def arguments(self, parent: str, f: GqlField, sel: Selection) -> None:
        given = sel.arg_map()
        subject = f"{parent}.{f.name}"
        for name in given:
            if f.arg(name) is None:
                self.add("unknown-argument", f"{subject}({name})")
        for a in f.args:
            if a.name not in given:
                if isinstance(a.type, NonNullType):
                    self.add("missing-argument", f"{subject}({a.name})")
                continue
            value = given[a.name]
            if not self.variable_uses(value, a.type, f"{subject}({a.name})"):
                continue
            try:
                coerce_value(a.type, value, self.schema, self._effective_vars())
            except CoercionError as exc:
                self.add("invalid-argument", f"{subject}({a.name}): {exc}")

    def _effective_vars(self) -> dict[str, Any]:
        out = {}
        for v in self.doc.variable_defs:
            if v.name in self.variables:
                out[v.name] = self.variables[v.name]
            elif v.has_default:
                out[v.name] = v.default
        return out

    def variable_uses(self, value: Any, expr: TypeExpr, where: str) -> bool:
        """Check variables inside ``value``; False if any is unusable."""
        ok = True
        if isinstance(value, Variable):
            self.used.add(value.name)
            d = self.var_defs.get(value.name)
            if d is None:
                self.add("undefined-variable", f"${value.name}")
                return False
            if not _var_fits(d.type, expr, d.has_default and d.default is not None):
                self.add("variable-type-mismatch", f"${value.name} at {where}")
                return False
            return True
        inner = expr.of if isinstance(expr, NonNullType) else expr
        if isinstance(value, list):
            item_t = inner.of if isinstance(inner, ListType) else inner
            for v in value:
                ok = self.variable_uses(v, item_t, where) and ok
        elif isinstance(value, dict) and isinstance(inner, NamedType):
            target = self.schema.type(inner.name)
            if isinstance(target, InputObjectType):
                for f in target.fields:
                    if f.name in value:
                        ok = self.variable_uses(value[f.name], f.type, f"{where}.{f.name}") and ok
        return ok


def validate_request(doc: RequestDoc, schema: SchemaDoc, variables: Mapping[str, Any] | None = None) -> list[Violation]:
    """Every rule the request breaks; empty means it may be executed."""
    return _Validator(doc, schema, variables).run()


def effective_variables(doc: RequestDoc, variables: Mapping[str, Any] | None) -> dict[str, Any]:
    return _Validator(doc, SchemaDoc(), variables)._effective_vars()
