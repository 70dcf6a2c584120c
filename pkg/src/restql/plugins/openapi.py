"""OpenAPI 3.x ingestion.

Scalar ``format`` hints are always carried into the resulting source types;
the processor decides what they map to.  Composition keywords other than
``allOf`` have no faithful GraphQL output form here and become opaque types.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..surface import (
    ApiSurface,
    ListOf,
    MapOf,
    Named,
    Opaque,
    Primitive,
    Service,
    SourceField,
    SourceLocation,
    SourceOperation,
    SourceParam,
    SourceType,
    TypeDecl,
    Void,
)
from . import IngestionError
from .apiir import check_surface

METHODS = ("get", "put", "post", "delete", "patch")
PRIMITIVES = ("integer", "number", "string", "boolean")
ALLOF_DEPTH_LIMIT = 32


class OpenApiError(IngestionError):
    pass


class UnsupportedVersion(OpenApiError):
    pass


class UnresolvedRef(OpenApiError):
    pass


class CyclicRef(OpenApiError):
    pass


class UnsupportedConstruct(OpenApiError):
    pass


def _stringify_keys(node: Any) -> Any:
    # YAML turns `200:` into an int key
    if isinstance(node, dict):
        return {str(k): _stringify_keys(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_stringify_keys(v) for v in node]
    return node


def _pointer_escape(part: str) -> str:
    return part.replace("~", "~0").replace("/", "~1")


def _camel(text: str) -> str:
    parts = [p for p in re.split(r"[^0-9A-Za-z]+", text) if p]
    return "".join(p[:1].upper() + p[1:] for p in parts)


@dataclass
class OpenApiBinding:
    """Document under ingestion plus the component index built from it."""

    document: dict[str, Any]
    locator: str = "<memory>"
    use_operation_id: bool = True
    decls: dict[str, TypeDecl] = field(default_factory=dict)
    _decl_origin: dict[str, int] = field(default_factory=dict)
    _in_progress: set[str] = field(default_factory=set)

    @property
    def components(self) -> dict[str, Any]:
        return self.document.get("components", {}).get("schemas", {})

    # -- refs ----------------------------------------------------------------

    def resolve(self, ref: str) -> Any:
        if not ref.startswith("#/"):
            raise UnresolvedRef(f"external reference {ref!r} is not supported", self.locator)
        node: Any = self.document
        for raw in ref[2:].split("/"):
            part = raw.replace("~1", "/").replace("~0", "~")
            if isinstance(node, dict) and part in node:
                node = node[part]
            elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
                node = node[int(part)]
            else:
                raise UnresolvedRef(f"unresolved reference {ref}", self.locator)
        return node

    def deref(self, node: Any) -> Any:
        seen = set()
        while isinstance(node, dict) and "$ref" in node:
            ref = node["$ref"]
            if ref in seen:
                raise CyclicRef(f"reference cycle through {ref}", self.locator)
            seen.add(ref)
            node = self.resolve(ref)
        return node

    # -- schemas -------------------------------------------------------------

    def map_schema(self, schema: Any, hint: str, strict: bool = False) -> SourceType:
        if not isinstance(schema, dict):
            raise UnsupportedConstruct(f"schema for {hint} is not an object", self.locator)
        if "$ref" in schema:
            return self._map_ref(schema["$ref"], hint, strict)
        for keyword in ("oneOf", "anyOf", "not"):
            if keyword in schema:
                if strict:
                    raise UnsupportedConstruct(f"'{keyword}' in schema {hint}", self.locator)
                return Opaque(keyword)
        if "allOf" in schema:
            return self._named_object(hint, schema)

        type_ = schema.get("type")
        if isinstance(type_, list):  # 3.1 style ["string", "null"]
            non_null = [t for t in type_ if t != "null"]
            if len(non_null) != 1:
                if strict:
                    raise UnsupportedConstruct(f"union type {type_} in schema {hint}", self.locator)
                return Opaque("type-union")
            type_ = non_null[0]

        if "enum" in schema and type_ in (None, "string"):
            return self._named_enum(hint, schema)
        if type_ == "array":
            if "items" not in schema:
                return ListOf(Opaque("untyped"))
            return ListOf(self.map_schema(schema["items"], hint + "Item", strict))
        if type_ == "object" or "properties" in schema or "additionalProperties" in schema:
            if schema.get("properties") or type_ == "object" and "additionalProperties" not in schema:
                return self._named_object(hint, schema)
            extra = schema.get("additionalProperties")
            if extra is True or extra == {} or extra is None:
                return MapOf(Primitive("string"), Opaque("untyped"))
            if extra is False:
                return self._named_object(hint, schema)
            return MapOf(Primitive("string"), self.map_schema(extra, hint + "Value", strict))
        if type_ in PRIMITIVES:
            fmt = schema.get("format")
            return Primitive(type_, str(fmt) if fmt is not None else None)
        if strict:
            raise UnsupportedConstruct(f"untyped schema {hint}", self.locator)
        return Opaque("untyped")

    def _map_ref(self, ref: str, hint: str, strict: bool) -> SourceType:
        prefix = "#/components/schemas/"
        target = self.resolve(ref)
        if ref.startswith(prefix) and "/" not in ref[len(prefix):]:
            name = ref[len(prefix):].replace("~1", "/").replace("~0", "~")
            if self._is_declarable(target):
                return self._declare(name, target, strict)
            if name in self._in_progress:
                raise CyclicRef(f"reference cycle through {ref}", self.locator)
            self._in_progress.add(name)
            try:
                return self.map_schema(target, name, strict)
            finally:
                self._in_progress.discard(name)
        return self.map_schema(target, hint, strict)

    def _is_declarable(self, schema: Any) -> bool:
        schema = self.deref(schema)
        if not isinstance(schema, dict):
            return False
        if any(k in schema for k in ("oneOf", "anyOf", "not")):
            return False
        if "allOf" in schema:
            return True
        if "enum" in schema and schema.get("type") in (None, "string"):
            return True
        if schema.get("properties"):
            return True
        return schema.get("type") == "object" and schema.get("additionalProperties") in (None, False)

    def _declare(self, name: str, schema: dict[str, Any], strict: bool) -> Named:
        if name in self.decls or name in self._in_progress:
            return Named(name)
        self._in_progress.add(name)
        try:
            if "enum" in schema and "properties" not in schema and "allOf" not in schema:
                self.decls[name] = TypeDecl("enum", values=tuple(str(v) for v in schema["enum"]))
            else:
                self.decls[name] = TypeDecl("object", fields=self._fields(name, schema, strict))
        finally:
            self._in_progress.discard(name)
        return Named(name)

    def _fresh_name(self, hint: str, schema: dict[str, Any]) -> str:
        base = _camel(hint) or "Inline"
        name, n = base, 1
        while name in self.decls or name in self.components or name in self._in_progress:
            if self._decl_origin.get(name) == id(schema):
                return name
            n += 1
            name = f"{base}{n}"
        self._decl_origin[name] = id(schema)
        return name

    def _named_object(self, hint: str, schema: dict[str, Any]) -> Named:
        name = self._fresh_name(hint, schema)
        if name in self.decls:
            return Named(name)
        self._in_progress.add(name)
        try:
            self.decls[name] = TypeDecl("object", fields=self._fields(name, schema, False))
        finally:
            self._in_progress.discard(name)
        return Named(name)

    def _named_enum(self, hint: str, schema: dict[str, Any]) -> Named:
        name = self._fresh_name(hint, schema)
        if name not in self.decls:
            self.decls[name] = TypeDecl("enum", values=tuple(str(v) for v in schema["enum"]))
        return Named(name)

    def _collect_properties(self, schema: dict[str, Any], stack: tuple[str, ...]) -> tuple[dict[str, Any], set[str]]:
        if len(stack) > ALLOF_DEPTH_LIMIT:
            raise CyclicRef("allOf nesting exceeds depth limit", self.locator)
        props: dict[str, Any] = {}
        required: set[str] = set()
        for part in schema.get("allOf", ()):
            if isinstance(part, dict) and "$ref" in part:
                ref = part["$ref"]
                if ref in stack:
                    raise CyclicRef(f"allOf cycle through {ref}", self.locator)
                sub_props, sub_req = self._collect_properties(self.resolve(ref), stack + (ref,))
            else:
                sub_props, sub_req = self._collect_properties(part, stack)
            props.update(sub_props)
            required |= sub_req
        props.update(schema.get("properties", {}) or {})
        required |= set(schema.get("required", ()) or ())
        return props, required

    def _fields(self, owner: str, schema: dict[str, Any], strict: bool) -> tuple[SourceField, ...]:
        props, required = self._collect_properties(schema, ())
        fields = []
        for prop, sub in props.items():
            t = self.map_schema(sub, owner + _camel(prop), strict)
            sub_resolved = self.deref(sub) if isinstance(sub, dict) else sub
            is_nullable = isinstance(sub_resolved, dict) and (
                sub_resolved.get("nullable") is True
                or (isinstance(sub_resolved.get("type"), list) and "null" in sub_resolved["type"])
            )
            fields.append(SourceField(prop, t, required=prop in required and not is_nullable))
        return tuple(fields)

    # -- operations ----------------------------------------------------------

    def operation_name(self, method: str, path: str, op: dict[str, Any]) -> str:
        if self.use_operation_id and op.get("operationId"):
            return str(op["operationId"])
        parts = []
        for seg in path.strip("/").split("/"):
            if not seg:
                continue
            if seg.startswith("{") and seg.endswith("}"):
                parts.append("By" + _camel(seg[1:-1]))
            else:
                parts.append(_camel(seg))
        return method + "".join(parts)

    def _params(self, name: str, item: dict[str, Any], op: dict[str, Any], where: str) -> list[SourceParam]:
        merged: dict[tuple[str, str], dict[str, Any]] = {}
        for raw in list(item.get("parameters", ())) + list(op.get("parameters", ())):
            p = self.deref(raw)
            merged[(p.get("name"), p.get("in"))] = p
        out = []
        for (pname, loc), p in merged.items():
            if loc not in ("path", "query"):
                continue  # header/cookie parameters are forwarded by header passthrough
            style = p.get("style", "simple" if loc == "path" else "form")
            if (loc, style) not in (("path", "simple"), ("query", "form")):
                raise UnsupportedConstruct(f"parameter {pname!r} uses unsupported style {style!r}", where)
            if "schema" not in p:
                raise UnsupportedConstruct(f"parameter {pname!r} has no schema", where)
            t = self.map_schema(p["schema"], name + _camel(pname))
            out.append(SourceParam(pname, t, loc, bool(p.get("required", loc == "path"))))
        return out

    @staticmethod
    def _json_schema(content: dict[str, Any]) -> Any:
        for media, body in content.items():
            if media == "application/json" or media.endswith("+json"):
                return body.get("schema", {})
        return None

    def _body(self, name: str, op: dict[str, Any]) -> SourceParam | None:
        if "requestBody" not in op:
            return None
        body = self.deref(op["requestBody"])
        schema = self._json_schema(body.get("content", {}))
        pname = op.get("x-codegen-request-body-name")
        if schema is None:
            t: SourceType = Opaque("non-JSON request body")
        else:
            t = self.map_schema(schema, name + "Request")
            if not pname and isinstance(schema, dict) and "$ref" in schema:
                ref_name = schema["$ref"].rsplit("/", 1)[-1]
                pname = ref_name[:1].lower() + ref_name[1:]
        return SourceParam(pname or "body", t, "body", bool(body.get("required", False)))

    def _returns(self, name: str, op: dict[str, Any]) -> SourceType:
        responses = op.get("responses", {}) or {}
        success = sorted(code for code in responses if re.fullmatch(r"2(\d\d|XX)", code))
        chosen = responses[success[0]] if success else responses.get("default")
        if chosen is None:
            return Void()
        chosen = self.deref(chosen)
        schema = self._json_schema(chosen.get("content", {}) or {})
        if schema is None:
            return Void()
        return self.map_schema(schema, name + "Response")

    def surface(self) -> ApiSurface:
        services: dict[str, list[SourceOperation]] = {}
        for path, item in (self.document.get("paths") or {}).items():
            item = self.deref(item)
            for method in item:
                if method not in METHODS:
                    continue
                op = item[method]
                where = f"{self.locator}#/paths/{_pointer_escape(path)}/{method}"
                name = self.operation_name(method, path, op)
                params = self._params(name, item, op, where)
                body = self._body(name, op)
                if body is not None:
                    params.append(body)
                returns = self._returns(name, op)
                tags = op.get("tags") or ["default"]
                services.setdefault(str(tags[0]), []).append(
                    SourceOperation(
                        name=name,
                        http_method=method.upper(),
                        path=path,
                        params=tuple(params),
                        returns=returns,
                        location=SourceLocation(where),
                    )
                )
        # components that no operation reached are still part of the API description
        for comp_name, schema in self.components.items():
            if self._is_declarable(schema):
                self._declare(comp_name, self.deref(schema), False)
        return ApiSurface(
            services=tuple(Service(ns, tuple(ops)) for ns, ops in services.items()),
            type_decls=dict(self.decls),
            metadata={"plugin": "openapi", "source": self.locator},
        )


def _load_document(text: str, format: str, locator: str) -> dict[str, Any]:
    try:
        if format == "json":
            data = json.loads(text)
        elif format in ("yaml", "yml"):
            data = yaml.safe_load(text)
        else:
            raise OpenApiError(f"unknown document format {format!r}", locator)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise OpenApiError(f"cannot parse {format} document: {exc}", locator) from exc
    if not isinstance(data, dict):
        raise OpenApiError("document root must be a mapping", locator)
    return _stringify_keys(data)


def parse_openapi(document: str, format: str = "json", locator: str = "<memory>", *, use_operation_id: bool = True) -> ApiSurface:
    data = _load_document(document, format, locator)
    version = str(data.get("openapi", data.get("swagger", "")))
    if not version.startswith("3."):
        raise UnsupportedVersion(f"unsupported OpenAPI version {version or '(none)'!r}; 3.x required", locator)
    surface = OpenApiBinding(data, locator, use_operation_id).surface()
    check_surface(surface, locator)
    return surface


def map_openapi_schema(
    schema: dict[str, Any], *, name: str = "Inline", decls: dict[str, TypeDecl] | None = None
) -> SourceType:
    """Map a reference-free schema object to a source type.

    Object and enum schemas are declared into ``decls`` under ``name``.
    ``oneOf``/``anyOf`` raise :class:`UnsupportedConstruct`.
    """
    binding = OpenApiBinding({"openapi": "3.0.0"})
    if decls is not None:
        binding.decls = decls
    return binding.map_schema(schema, name, strict=True)


class OpenApiPlugin:
    name = "openapi"

    def loads(self, text: str, locator: str = "<memory>", format: str | None = None) -> ApiSurface:
        if format is None:
            format = "json" if text.lstrip().startswith("{") else "yaml"
        return parse_openapi(text, format, locator)

    def load(self, path: str | Path) -> ApiSurface:
        path = Path(path)
        suffix = path.suffix.lower().lstrip(".")
        if suffix not in ("json", "yaml", "yml"):
            raise OpenApiError(f"unsupported file extension {path.suffix!r}", str(path))
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IngestionError(str(exc), str(path)) from exc
        return parse_openapi(text, "json" if suffix == "json" else "yaml", path.name)
