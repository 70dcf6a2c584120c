"""Request execution over a binding manifest."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..generator import Binding, BindingManifest, LinkCall, ObjectMappingPlan, Transform, entry_list_to_map, map_to_entry_list
from ..scalars import ScalarError, coerce_input, serialize
from ..schema import EnumType, GqlField, InterfaceType, ListType, NonNullType, ObjectType, SchemaDoc, TypeExpr
from .backend import BackendAdapter, BackendError, BackendRequest
from .request import RequestDoc, Selection
from .validation import coerce_value, effective_variables


class FieldError(Exception):
    pass


def _json_key(key: Any) -> str:
    """JSON object keys are strings: 5 -> "5", True -> "true"."""
    return key if isinstance(key, str) else json.dumps(key)


@dataclass
class _Run:
    schema: SchemaDoc
    manifest: BindingManifest
    backend: BackendAdapter
    variables: dict[str, Any]
    headers: tuple[tuple[str, str], ...] = ()
    errors: list[dict[str, Any]] = field(default_factory=list)

    # -- inbound ------------------------------------------------------------

    def to_rest(self, value: Any, t: Transform) -> Any:
        if value is None:
            return None
        if t.kind == "list":
            return [self.to_rest(v, t.item) for v in value]
        if t.kind == "scalar-coerce":
            return coerce_input(t.scalar, value)
        if t.kind == "nested":
            plan = self.manifest.mapping_plans[t.plan]
            out = {}
            for step in plan.steps:
                if step.source_field in value:
                    out[step.target_field] = self.to_rest(value[step.source_field], step.transform)
            return out
        if t.kind == "entry-list-to-map":
            pairs = [{"key": _json_key(self.to_rest(e.get("key"), t.key)), "value": self.to_rest(e.get("value"), t.value)} for e in value]
            return entry_list_to_map(pairs)
        return value

    def request_for(self, b: Binding, args: Mapping[str, Any]) -> BackendRequest:
        path, query, body, has_body = [], [], None, False
        for pb in b.backend.param_bindings:
            if pb.gql_arg not in args:
                continue
            value = self.to_rest(args[pb.gql_arg], pb.transform)
            if pb.location == "path":
                path.append((pb.source_param, value))
            elif pb.location == "query":
                if value is not None:
                    query.append((pb.source_param, value))
            else:
                body, has_body = value, True
        return BackendRequest(
            b.backend.http_method, b.backend.path_template, tuple(path), tuple(query), body, has_body, self.headers
        )

    # -- backend ------------------------------------------------------------

    def invoke(self, request: BackendRequest, extract: tuple[str | None, ...]) -> Any:
        try:
            resp = self.backend.call(request)
        except BackendError as exc:
            raise FieldError(str(exc)) from exc
        if not 200 <= resp.status < 300:
            raise FieldError(f"backend returned HTTP {resp.status} for {request.method} {request.path}")
        body = resp.body
        for step in extract:
            if step is not None:
                body = body.get(step) if isinstance(body, dict) else None
        return body

    # -- outbound -----------------------------------------------------------

    def complete(self, raw: Any, t: Transform, expr: TypeExpr, sel: Selection | None, path: list) -> Any:
        if isinstance(expr, NonNullType):
            value = self.complete(raw, t, expr.of, sel, path)
            if value is None:
                raise FieldError(f"null returned for non-null field {'.'.join(map(str, path))}")
            return value
        if raw is None:
            return None
        if isinstance(expr, ListType):
            if t.kind == "map-to-entry-list":
                if not isinstance(raw, dict):
                    raise FieldError(f"expected a JSON object for a map, got {type(raw).__name__}")
                entry_t = Transform("nested", plan=t.plan)
                return [self.complete(e, entry_t, expr.of, sel, path + [i]) for i, e in enumerate(map_to_entry_list(raw))]
            if not isinstance(raw, list):
                raise FieldError(f"expected a list, got {type(raw).__name__}")
            item_t = t.item if t.kind == "list" else t
            return [self.complete(v, item_t, expr.of, sel, path + [i]) for i, v in enumerate(raw)]
        name = expr.name
        if self.schema.is_leaf(name):
            return self.leaf(raw, name, t)
        plan = self.manifest.mapping_plans[t.plan]
        return self.object(raw, plan, name, sel.selections or (), path)

    def leaf(self, raw: Any, name: str, t: Transform) -> Any:
        target = self.schema.type(name)
        from_key = t.kind == "scalar-coerce"
        if isinstance(target, EnumType):
            if raw not in target.values:
                raise FieldError(f"{raw!r} is not a value of enum {name}")
            return raw
        try:
            return serialize(name, raw, from_key=from_key and not isinstance(raw, (int, float)))
        except ScalarError as exc:
            raise FieldError(str(exc)) from None

    def typename(self, raw: Any, type_name: str) -> str:
        decl = self.schema.type(type_name)
        if not isinstance(decl, InterfaceType):
            return type_name
        # REST payloads carry no discriminator: pick the implementor whose
        # declared fields best match the keys present
        keys = set(raw) if isinstance(raw, dict) else set()
        best = None
        for t in sorted(self.schema.types, key=lambda t: t.name):
            if isinstance(t, ObjectType) and type_name in t.interfaces:
                score = len(keys & {f.name for f in t.fields})
                if best is None or score > best[0]:
                    best = (score, t.name)
        return best[1] if best else type_name

    def object(self, raw: Any, plan: ObjectMappingPlan, type_name: str, selections: tuple[Selection, ...], path: list) -> dict:
        if not isinstance(raw, dict):
            raise FieldError(f"expected a JSON object for {type_name}, got {type(raw).__name__}")
        fields = {f.name: f for f in self.schema.fields_of(type_name) or ()}
        out: dict[str, Any] = {}
        for sel in selections:
            if sel.key in out:
                continue
            if sel.name == "__typename":
                out[sel.key] = self.typename(raw, type_name)
                continue
            step = plan.step_for(sel.name)
            gf = fields[sel.name]
            try:
                if step.link is not None:
                    value = self.follow(raw, step.link)
                else:
                    value = raw.get(step.source_field)
                out[sel.key] = self.complete(value, step.transform, gf.type, sel, path + [sel.key])
            except FieldError as exc:
                if isinstance(gf.type, NonNullType):
                    raise
                self.error(str(exc), path + [sel.key], sel)
                out[sel.key] = None
        return out

    def follow(self, parent: Mapping[str, Any], link: LinkCall) -> Any:
        path, query = [], []
        for wire, location, parent_field in link.params:
            value = parent.get(parent_field)
            if value is None:
                return None  # nothing to follow
            (path if location == "path" else query).append((wire, value))
        request = BackendRequest(link.http_method, link.path_template, tuple(path), tuple(query), headers=self.headers)
        return self.invoke(request, link.extract)

    def error(self, message: str, path: list, sel: Selection | None) -> None:
        err: dict[str, Any] = {"message": message, "path": path}
        if sel is not None and sel.line:
            err["locations"] = [{"line": sel.line, "column": sel.column}]
        self.errors.append(err)

    # -- roots --------------------------------------------------------------

    def root_field(self, root: str, gf: GqlField, sel: Selection) -> Any:
        b = self.manifest.binding(root, sel.name)
        if b.backend is None:
            return None
        args = {}
        given = sel.arg_map()
        for a in gf.args:
            if a.name in given:
                args[a.name] = coerce_value(a.type, given[a.name], self.schema, self.variables)
        raw = self.invoke(self.request_for(b, args), b.extract)
        if b.void_result:
            return True
        return self.complete(raw, b.result, gf.type, sel, [sel.key])


def execute(
    doc: RequestDoc,
    variables: Mapping[str, Any] | None,
    schema: SchemaDoc,
    manifest: BindingManifest,
    backend: BackendAdapter,
    headers: Mapping[str, str] | None = None,
) -> dict[str, Any]:
    """Run a validated request.  Root fields fail independently."""
    run = _Run(schema, manifest, backend, effective_variables(doc, variables), tuple((headers or {}).items()))
    root = "mutation" if doc.operation_kind == "mutation" else "query"
    root_name = "Mutation" if root == "mutation" else "Query"
    fields = {f.name: f for f in schema.root(root)}
    data: dict[str, Any] = {}
    # mutations run serially in document order; queries are run the same
    # way so responses are reproducible
    for sel in doc.selections:
        if sel.key in data:
            continue
        if sel.name == "__typename":
            data[sel.key] = root_name
            continue
        try:
            data[sel.key] = run.root_field(root, fields[sel.name], sel)
        except FieldError as exc:
            run.error(str(exc), [sel.key], sel)
            data[sel.key] = None
    out: dict[str, Any] = {"data": data}
    if run.errors:
        out["errors"] = run.errors
    return out

