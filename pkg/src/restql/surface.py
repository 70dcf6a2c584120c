"""Framework-agnostic description of source APIs, as produced by plugins."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator, Union

HTTP_METHODS = ("GET", "POST", "PUT", "PATCH", "DELETE")
PARAM_LOCATIONS = ("path", "query", "body")


@dataclass(frozen=True)
class Primitive:
    name: str  # integer | number | string | boolean
    format: str | None = None


@dataclass(frozen=True)
class Named:
    name: str  # qualified name
    args: tuple[SourceType, ...] = ()


@dataclass(frozen=True)
class ListOf:
    component: SourceType


@dataclass(frozen=True)
class MapOf:
    key: SourceType
    value: SourceType


@dataclass(frozen=True)
class Void:
    pass


@dataclass(frozen=True)
class NullableMarker:
    inner: SourceType
    required: bool


@dataclass(frozen=True)
class Opaque:
    """A construct the plugin saw but cannot express (e.g. ``oneOf``)."""

    reason: str


SourceType = Union[Primitive, Named, ListOf, MapOf, Void, NullableMarker, Opaque]


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int | None = None


@dataclass(frozen=True)
class SourceParam:
    name: str
    type: SourceType
    location: str
    required: bool


@dataclass(frozen=True)
class SourceLink:
    operation: str
    args: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class SourceField:
    name: str
    type: SourceType
    required: bool = False
    transient: bool = False
    link: SourceLink | None = None


@dataclass(frozen=True)
class SourceMethod:
    """Interface method; parameters are carried only to be flagged."""

    name: str
    type: SourceType
    params: tuple[SourceParam, ...] = ()


@dataclass(frozen=True)
class TypeDecl:
    kind: str  # object | interface | enum
    fields: tuple[SourceField, ...] = ()
    operations: tuple[SourceMethod, ...] = ()
    values: tuple[str, ...] = ()
    type_params: tuple[str, ...] = ()
    implements: tuple[str, ...] = ()


@dataclass(frozen=True)
class SourceOperation:
    name: str
    http_method: str
    path: str
    params: tuple[SourceParam, ...]
    returns: SourceType
    location: SourceLocation


@dataclass(frozen=True)
class Service:
    namespace: str
    operations: tuple[SourceOperation, ...]


@dataclass(frozen=True)
class ApiSurface:
    services: tuple[Service, ...] = ()
    type_decls: dict[str, TypeDecl] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def iter_operations(self) -> Iterator[tuple[Service, SourceOperation]]:
        for svc in self.services:
            for op in svc.operations:
                yield svc, op

    @property
    def operation_count(self) -> int:
        return sum(len(s.operations) for s in self.services)


def path_placeholders(path: str) -> list[str]:
    out, i = [], 0
    while True:
        start = path.find("{", i)
        if start < 0:
            return out
        end = path.find("}", start)
        if end < 0:
            return out
        out.append(path[start + 1 : end])
        i = end + 1


def source_id(namespace: str, op: SourceOperation) -> str:
    params = ",".join(source_type_label(p.type) for p in op.params)
    return f"{namespace}#{op.name}({params})"


def source_type_label(t: SourceType) -> str:
    """Readable source-level spelling, used in identities and overload names."""
    if isinstance(t, Primitive):
        return t.name if t.format is None else f"{t.name}:{t.format}"
    if isinstance(t, Named):
        if t.args:
            return f"{t.name}<{','.join(source_type_label(a) for a in t.args)}>"
        return t.name
    if isinstance(t, ListOf):
        return f"list<{source_type_label(t.component)}>"
    if isinstance(t, MapOf):
        return f"map<{source_type_label(t.key)},{source_type_label(t.value)}>"
    if isinstance(t, Void):
        return "void"
    if isinstance(t, NullableMarker):
        return source_type_label(t.inner) + ("!" if t.required else "?")
    return f"opaque<{t.reason}>"


# -- canonical data form -----------------------------------------------------
# Optional keys are only emitted when they differ from their default, and the
# API-IR schema forbids spelling a default explicitly, so documents round-trip.


def source_type_to_data(t: SourceType) -> dict[str, Any]:
    if isinstance(t, Primitive):
        out: dict[str, Any] = {"kind": "primitive", "name": t.name}
        if t.format is not None:
            out["format"] = t.format
        return out
    if isinstance(t, Named):
        out = {"kind": "named", "name": t.name}
        if t.args:
            out["args"] = [source_type_to_data(a) for a in t.args]
        return out
    if isinstance(t, ListOf):
        return {"kind": "list", "of": source_type_to_data(t.component)}
    if isinstance(t, MapOf):
        return {"kind": "map", "key": source_type_to_data(t.key), "value": source_type_to_data(t.value)}
    if isinstance(t, Void):
        return {"kind": "void"}
    if isinstance(t, NullableMarker):
        return {"kind": "nullable", "inner": source_type_to_data(t.inner), "required": t.required}
    if isinstance(t, Opaque):
        return {"kind": "opaque", "reason": t.reason}
    raise TypeError(t)


def source_type_from_data(d: dict[str, Any]) -> SourceType:
    kind = d["kind"]
    if kind == "primitive":
        return Primitive(d["name"], d.get("format"))
    if kind == "named":
        return Named(d["name"], tuple(source_type_from_data(a) for a in d.get("args", ())))
    if kind == "list":
        return ListOf(source_type_from_data(d["of"]))
    if kind == "map":
        return MapOf(source_type_from_data(d["key"]), source_type_from_data(d["value"]))
    if kind == "void":
        return Void()
    if kind == "nullable":
        return NullableMarker(source_type_from_data(d["inner"]), d["required"])
    if kind == "opaque":
        return Opaque(d["reason"])
    raise ValueError(f"unknown source type kind {kind!r}")


def _param_to_data(p: SourceParam) -> dict[str, Any]:
    return {"name": p.name, "type": source_type_to_data(p.type), "location": p.location, "required": p.required}


def _field_to_data(f: SourceField) -> dict[str, Any]:
    out: dict[str, Any] = {"name": f.name, "type": source_type_to_data(f.type)}
    if f.required:
        out["required"] = True
    if f.transient:
        out["transient"] = True
    if f.link is not None:
        out["link"] = {"operation": f.link.operation, "args": dict(f.link.args)}
    return out


def _decl_to_data(decl: TypeDecl) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": decl.kind}
    if decl.kind == "object":
        out["fields"] = [_field_to_data(f) for f in decl.fields]
        if decl.implements:
            out["implements"] = list(decl.implements)
    elif decl.kind == "interface":
        ops = []
        for m in decl.operations:
            md: dict[str, Any] = {"name": m.name, "type": source_type_to_data(m.type)}
            if m.params:
                md["params"] = [_param_to_data(p) for p in m.params]
            ops.append(md)
        out["operations"] = ops
    elif decl.kind == "enum":
        out["values"] = list(decl.values)
    if decl.type_params:
        out["typeParams"] = list(decl.type_params)
    return out


def surface_to_data(surface: ApiSurface) -> dict[str, Any]:
    services = []
    for svc in surface.services:
        ops = []
        for op in svc.operations:
            loc: dict[str, Any] = {"file": op.location.file}
            if op.location.line is not None:
                loc["line"] = op.location.line
            ops.append(
                {
                    "name": op.name,
                    "httpMethod": op.http_method,
                    "path": op.path,
                    "params": [_param_to_data(p) for p in op.params],
                    "return": source_type_to_data(op.returns),
                    "location": loc,
                }
            )
        services.append({"namespace": svc.namespace, "operations": ops})
    return {
        "apiirVersion": "1",
        "metadata": dict(surface.metadata),
        "services": services,
        "typeDecls": {name: _decl_to_data(d) for name, d in surface.type_decls.items()},
    }


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def serialize_surface(surface: ApiSurface) -> str:
    return canonical_json(surface_to_data(surface))


def _param_from_data(d: dict[str, Any]) -> SourceParam:
    return SourceParam(d["name"], source_type_from_data(d["type"]), d["location"], d["required"])


def _field_from_data(d: dict[str, Any]) -> SourceField:
    link = None
    if "link" in d:
        link = SourceLink(d["link"]["operation"], tuple(sorted(d["link"]["args"].items())))
    return SourceField(
        d["name"], source_type_from_data(d["type"]), d.get("required", False), d.get("transient", False), link
    )


def decl_from_data(d: dict[str, Any]) -> TypeDecl:
    return TypeDecl(
        kind=d["kind"],
        fields=tuple(_field_from_data(f) for f in d.get("fields", ())),
        operations=tuple(
            SourceMethod(m["name"], source_type_from_data(m["type"]), tuple(_param_from_data(p) for p in m.get("params", ())))
            for m in d.get("operations", ())
        ),
        values=tuple(d.get("values", ())),
        type_params=tuple(d.get("typeParams", ())),
        implements=tuple(d.get("implements", ())),
    )


def surface_from_data(data: dict[str, Any]) -> ApiSurface:
    services = []
    for svc in data["services"]:
        ops = []
        for op in svc["operations"]:
            loc = op["location"]
            ops.append(
                SourceOperation(
                    name=op["name"],
                    http_method=op["httpMethod"],
                    path=op["path"],
                    params=tuple(_param_from_data(p) for p in op["params"]),
                    returns=source_type_from_data(op["return"]),
                    location=SourceLocation(loc["file"], loc.get("line")),
                )
            )
        services.append(Service(svc["namespace"], tuple(ops)))
    return ApiSurface(
        services=tuple(services),
        type_decls={name: decl_from_data(d) for name, d in data["typeDecls"].items()},
        metadata=dict(data["metadata"]),
    )
