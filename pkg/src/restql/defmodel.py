"""Intermediate definition model.

Every source API is described here before any GraphQL is produced.  Data
types live under :class:`TypeDef` variants; meta elements (fields,
parameters, operations) are plain records that reference them.  Named types
are kept in a name-keyed pool on :class:`DefModel` and referenced through
:class:`TypeRef`, so recursive structures never become cyclic objects.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterator, Union

BUILTIN_SCALARS = ("Int", "Float", "String", "Boolean", "ID")
EXTENDED_SCALARS = (
    "Long",
    "Double",
    "Char",
    "Byte",
    "Short",
    "BigInteger",
    "BigDecimal",
    "DateTime",
    "Date",
    "Time",
)
# Opaque stand-in for types that could not be mapped (non-strict mode only).
UNMAPPED_SCALAR = "Unmapped"

NAME_RE = re.compile(r"^[_A-Za-z][_0-9A-Za-z]*$")


class NamingError(ValueError):
    """Raised when no GraphQL identifier can be derived from a source name."""


@dataclass(frozen=True)
class ScalarKind:
    name: str
    category: str  # "builtin" | "extended" | "custom"

    def __post_init__(self) -> None:
        reserved = {"builtin": BUILTIN_SCALARS, "extended": EXTENDED_SCALARS}
        if self.category in reserved:
            if self.name not in reserved[self.category]:
                raise ValueError(f"{self.name!r} is not a {self.category} scalar")
        elif self.category == "custom":
            if self.name in BUILTIN_SCALARS or self.name in EXTENDED_SCALARS:
                raise ValueError(f"custom scalar {self.name!r} shadows a predefined scalar")
            if not NAME_RE.match(self.name):
                raise ValueError(f"custom scalar name {self.name!r} is not a GraphQL name")
        else:
            raise ValueError(f"unknown scalar category {self.category!r}")

    @classmethod
    def of(cls, name: str) -> ScalarKind:
        """Look up a scalar by name, treating unknown names as custom scalars."""
        if name in BUILTIN_SCALARS:
            return cls(name, "builtin")
        if name in EXTENDED_SCALARS:
            return cls(name, "extended")
        return cls(name, "custom")

    @property
    def is_builtin(self) -> bool:
        return self.category == "builtin"


# -- data type definitions ---------------------------------------------------


@dataclass(frozen=True)
class LiteralDef:
    scalar_kind: ScalarKind


@dataclass(frozen=True)
class VoidDef:
    pass


@dataclass(frozen=True)
class NonNullDef:
    inner: TypeDef


@dataclass(frozen=True)
class ListDef:
    component: TypeDef


@dataclass(frozen=True)
class MapEntryDef:
    key: TypeDef
    value: TypeDef
    entry_name: str


@dataclass(frozen=True)
class FieldLink:
    """A field whose value is fetched by calling another operation.

    ``args`` pairs each parameter of the target operation with the source
    field of the parent object supplying its value.
    """

    operation: str  # source_id of the target operation
    args: tuple[tuple[str, str], ...]
    http_method: str = "GET"
    path: str = "/"
    # (wire name, location, parent source field) for each bound parameter
    params: tuple[tuple[str, str, str], ...] = ()
    # payload field per unwrapped wrapper layer, outermost first (None = whole body)
    extract: tuple[str | None, ...] = ()


@dataclass(frozen=True)
class FieldDef:
    name: str
    type: TypeDef
    source_name: str = ""
    link: FieldLink | None = None

    @property
    def nullable(self) -> bool:
        return not isinstance(self.type, NonNullDef)

    @property
    def wire_name(self) -> str:
        return self.source_name or self.name


@dataclass(frozen=True)
class ObjectDef:
    name: str
    source_name: str
    fields: tuple[FieldDef, ...]
    type_args: tuple[TypeDef, ...] = ()
    interfaces: tuple[str, ...] = ()


@dataclass(frozen=True)
class InterfaceDef:
    name: str
    operations: tuple[FieldDef, ...]
    source_name: str = ""


@dataclass(frozen=True)
class EnumDef:
    name: str
    values: tuple[str, ...]
    source_name: str = ""


@dataclass(frozen=True)
class TypeRef:
    name: str


TypeDef = Union[
    LiteralDef, VoidDef, NonNullDef, ListDef, MapEntryDef, ObjectDef, InterfaceDef, EnumDef, TypeRef
]
NamedDef = Union[ObjectDef, InterfaceDef, EnumDef, MapEntryDef, LiteralDef]


def non_null(t: TypeDef) -> TypeDef:
    """Wrap ``t`` as non-null without ever nesting or wrapping void."""
    if isinstance(t, (NonNullDef, VoidDef)):
        return t
    return NonNullDef(t)


def nullable(t: TypeDef) -> TypeDef:
    return t.inner if isinstance(t, NonNullDef) else t


def def_name(t: NamedDef) -> str:
    if isinstance(t, MapEntryDef):
        return t.entry_name
    if isinstance(t, LiteralDef):
        return t.scalar_kind.name
    return t.name


# -- meta definitions --------------------------------------------------------


class RwsDef(enum.Enum):
    READ = "READ"
    WRITE = "WRITE"
    SUBSCRIBE = "SUBSCRIBE"  # reserved; the pipeline never produces it


@dataclass(frozen=True)
class ParamDef:
    name: str
    type: TypeDef
    source_name: str = ""
    location: str = "query"  # path | query | body

    @property
    def required(self) -> bool:
        return isinstance(self.type, NonNullDef)

    @property
    def wire_name(self) -> str:
        return self.source_name or self.name


@dataclass(frozen=True)
class OperationDef:
    name: str
    source_id: str
    params: tuple[ParamDef, ...]
    output: TypeDef
    rws: RwsDef
    http_method: str = "GET"
    path: str = "/"


@dataclass(frozen=True)
class RenameRecord:
    kind: str  # "type" | "operation" | "instantiation" | "normalize"
    original: str
    assigned: str
    cause: str | None = None  # MappingCause value when the rename is a mitigation


@dataclass(frozen=True)
class WrapperRecord:
    operation: str
    wrapper: str
    payload_field: str | None = None


@dataclass(frozen=True)
class SynthesisRecord:
    subject: str
    cause: str
    action: str


@dataclass
class DefModel:
    operations: list[OperationDef] = field(default_factory=list)
    types: dict[str, NamedDef] = field(default_factory=dict)
    wrapper_log: list[WrapperRecord] = field(default_factory=list)
    rename_log: list[RenameRecord] = field(default_factory=list)
    synthesis_log: list[SynthesisRecord] = field(default_factory=list)

    def resolve(self, t: TypeDef) -> TypeDef:
        if isinstance(t, TypeRef):
            return self.types[t.name]
        return t

    def operation(self, name: str, rws: RwsDef) -> OperationDef:
        for op in self.operations:
            if op.name == name and op.rws is rws:
                return op
        raise KeyError(name)

    def to_json(self, *, include_logs: bool = False) -> str:
        return json.dumps(model_to_data(self, include_logs=include_logs), sort_keys=True, separators=(",", ":"))


# -- naming ------------------------------------------------------------------


def normalize_name(raw: str) -> str:
    """Turn an arbitrary source name into a GraphQL identifier."""
    out = re.sub(r"[^0-9A-Za-z_]", "_", raw)
    if out and out[0].isdigit():
        out = "_" + out
    if not re.search(r"[0-9A-Za-z]", out) or out.startswith("__"):
        raise NamingError(f"cannot derive a GraphQL name from {raw!r}")
    return out


def simple_name(qualified: str) -> str:
    return qualified.rsplit(".", 1)[-1]


def type_label(t: TypeDef, types: dict[str, NamedDef] | None = None) -> str:
    """Name fragment used when composing instantiation and entry names."""
    if isinstance(t, LiteralDef):
        return t.scalar_kind.name
    if isinstance(t, VoidDef):
        return "Void"
    if isinstance(t, NonNullDef):
        return "NonNull" + type_label(t.inner, types)
    if isinstance(t, ListDef):
        return "ListOf" + type_label(t.component, types)
    if isinstance(t, MapEntryDef):
        return t.entry_name
    if isinstance(t, TypeRef):
        return t.name
    return t.name


def canonical_name(
    t: TypeDef | tuple[TypeDef, TypeDef],
    *,
    qualified: bool = False,
    base: str | None = None,
) -> str:
    """Deterministic GraphQL identifier for a named definition.

    ``t`` may be an ObjectDef/InterfaceDef/EnumDef, a MapEntryDef, or a bare
    ``(key, value)`` pair for a map entry.  ``qualified`` selects the
    namespace-qualified form used to break name conflicts.  ``base`` overrides
    the base name of a generic instantiation (e.g. after its base was renamed).
    """
    if isinstance(t, tuple):
        key, value = t
        return f"{type_label(key)}{type_label(value)}Entry"
    if isinstance(t, MapEntryDef):
        return canonical_name((t.key, t.value))
    if isinstance(t, (ObjectDef, InterfaceDef, EnumDef)):
        source = t.source_name or t.name
        stem = base or normalize_name(source if qualified else simple_name(source))
        args = t.type_args if isinstance(t, ObjectDef) else ()
        if args:
            return stem + "Of" + "".join(type_label(a) for a in args)
        return stem
    raise NamingError(f"{type(t).__name__} has no canonical name")


# -- structural validation ---------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.subject}"


def iter_typedefs(t: TypeDef) -> Iterator[TypeDef]:
    """Pre-order walk of an anonymous type expression (stops at named defs)."""
    yield t
    if isinstance(t, NonNullDef):
        yield from iter_typedefs(t.inner)
    elif isinstance(t, ListDef):
        yield from iter_typedefs(t.component)
    elif isinstance(t, MapEntryDef):
        yield from iter_typedefs(t.key)
        yield from iter_typedefs(t.value)


def _check_expr(t: TypeDef, subject: str, model: DefModel, out: list[Violation], in_list: bool = False) -> None:
    if isinstance(t, NonNullDef):
        if isinstance(t.inner, NonNullDef):
            out.append(Violation("nested non-null", subject))
        elif isinstance(t.inner, VoidDef):
            out.append(Violation("non-null void", subject))
        _check_expr(t.inner, subject, model, out, in_list)
    elif isinstance(t, ListDef):
        if isinstance(t.component, VoidDef):
            out.append(Violation("list of void", subject))
        _check_expr(t.component, subject, model, out, True)
    elif isinstance(t, MapEntryDef):
        if not in_list:
            out.append(Violation("map entry outside list", subject))
        _check_expr(t.key, subject, model, out)
        _check_expr(t.value, subject, model, out)
    elif isinstance(t, TypeRef):
        if t.name not in model.types:
            out.append(Violation("unresolved reference", f"{subject} -> {t.name}"))
    elif isinstance(t, (ObjectDef, InterfaceDef, EnumDef)):
        if def_name(t) not in model.types:
            out.append(Violation("unpooled named type", f"{subject} -> {def_name(t)}"))


def validate_defmodel(model: DefModel) -> list[Violation]:
    """Report every structural invariant the model breaks (empty when sound)."""
    out: list[Violation] = []
    for name, t in model.types.items():
        if def_name(t) != name:
            out.append(Violation("pool key mismatch", name))
        if isinstance(t, ObjectDef):
            names = [f.name for f in t.fields]
            if len(set(names)) != len(names):
                out.append(Violation("duplicate field", name))
            for f in t.fields:
                _check_expr(f.type, f"{name}.{f.name}", model, out)
            for iface in t.interfaces:
                if not isinstance(model.types.get(iface), InterfaceDef):
                    out.append(Violation("unresolved reference", f"{name} implements {iface}"))
        elif isinstance(t, InterfaceDef):
            names = [f.name for f in t.operations]
            if len(set(names)) != len(names):
                out.append(Violation("duplicate field", name))
            for f in t.operations:
                _check_expr(f.type, f"{name}.{f.name}", model, out)
        elif isinstance(t, EnumDef):
            if len(set(t.values)) != len(t.values):
                out.append(Violation("duplicate enum value", name))
        elif isinstance(t, MapEntryDef):
            _check_expr(t.key, name, model, out)
            _check_expr(t.value, name, model, out)

    # monomorphized instantiations of one source type must not share a name
    seen: dict[tuple[str, str], tuple[TypeDef, ...]] = {}
    for t in model.types.values():
        if isinstance(t, ObjectDef) and t.type_args:
            key = (t.source_name, t.name)
            if key in seen and seen[key] != t.type_args:
                out.append(Violation("aliased instantiation", t.name))
            seen[key] = t.type_args

    op_names: set[tuple[str, RwsDef]] = set()
    for op in model.operations:
        if op.rws is RwsDef.SUBSCRIBE:
            out.append(Violation("subscription operation", op.name))
        if (op.name, op.rws) in op_names:
            out.append(Violation("duplicate operation", op.name))
        op_names.add((op.name, op.rws))
        for p in op.params:
            _check_expr(p.type, f"{op.name}({p.name})", model, out)
        _check_expr(op.output, op.name, model, out)

    assigned = [r.assigned for r in model.rename_log]
    if len(set(assigned)) != len(assigned):
        out.append(Violation("rename log not injective", ",".join(sorted({a for a in assigned if assigned.count(a) > 1}))))
    return out


# -- serialization -----------------------------------------------------------


def typedef_to_data(t: TypeDef) -> dict[str, Any]:
    if isinstance(t, LiteralDef):
        return {"kind": "literal", "scalar": t.scalar_kind.name, "category": t.scalar_kind.category}
    if isinstance(t, VoidDef):
        return {"kind": "void"}
    if isinstance(t, NonNullDef):
        return {"kind": "nonNull", "inner": typedef_to_data(t.inner)}
    if isinstance(t, ListDef):
        return {"kind": "list", "component": typedef_to_data(t.component)}
    if isinstance(t, MapEntryDef):
        return {
            "kind": "mapEntry",
            "entryName": t.entry_name,
            "key": typedef_to_data(t.key),
            "value": typedef_to_data(t.value),
        }
    if isinstance(t, TypeRef):
        return {"kind": "ref", "name": t.name}
    if isinstance(t, ObjectDef):
        out: dict[str, Any] = {
            "kind": "object",
            "name": t.name,
            "sourceName": t.source_name,
            "fields": [_field_to_data(f) for f in t.fields],
            "typeArgs": [typedef_to_data(a) for a in t.type_args],
        }
        if t.interfaces:
            out["interfaces"] = list(t.interfaces)
        return out
    if isinstance(t, InterfaceDef):
        return {
            "kind": "interface",
            "name": t.name,
            "sourceName": t.source_name,
            "operations": [_field_to_data(f) for f in t.operations],
        }
    if isinstance(t, EnumDef):
        return {"kind": "enum", "name": t.name, "sourceName": t.source_name, "values": list(t.values)}
    raise TypeError(t)


def _field_to_data(f: FieldDef) -> dict[str, Any]:
    out: dict[str, Any] = {"name": f.name, "type": typedef_to_data(f.type), "nullable": f.nullable}
    if f.source_name and f.source_name != f.name:
        out["sourceName"] = f.source_name
    if f.link is not None:
        out["link"] = {"operation": f.link.operation, "args": {k: v for k, v in f.link.args}}
    return out


def operation_to_data(op: OperationDef) -> dict[str, Any]:
    return {
        "name": op.name,
        "sourceId": op.source_id,
        "rws": op.rws.value,
        "httpMethod": op.http_method,
        "path": op.path,
        "params": [
            {
                "name": p.name,
                "sourceName": p.wire_name,
                "location": p.location,
                "required": p.required,
                "type": typedef_to_data(p.type),
            }
            for p in op.params
        ],
        "output": typedef_to_data(op.output),
    }


def model_to_data(model: DefModel, *, include_logs: bool = False) -> dict[str, Any]:
    data: dict[str, Any] = {
        "operations": [operation_to_data(op) for op in model.operations],
        "types": {name: typedef_to_data(t) for name, t in model.types.items()},
    }
    if include_logs:
        data["renameLog"] = [
            {"kind": r.kind, "original": r.original, "assigned": r.assigned, "cause": r.cause}
            for r in model.rename_log
        ]
        data["wrapperLog"] = [
            {"operation": w.operation, "wrapper": w.wrapper, "payloadField": w.payload_field}
            for w in model.wrapper_log
        ]
        data["synthesisLog"] = [
            {"subject": s.subject, "cause": s.cause, "action": s.action} for s in model.synthesis_log
        ]
    return data
