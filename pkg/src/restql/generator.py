"""Binding manifest: the data-driven resolvers of the gateway.

Each schema root field gets a :class:`Binding` saying which HTTP call
serves it and how values move between GraphQL and REST shapes.  Value
conversion is a small tree of :class:`Transform` nodes; object-shaped
values point at a named :class:`ObjectMappingPlan`, so recursive types
stay finite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .defmodel import (
    DefModel,
    EnumDef,
    FieldDef,
    FieldLink,
    InterfaceDef,
    ListDef,
    LiteralDef,
    MapEntryDef,
    NonNullDef,
    ObjectDef,
    OperationDef,
    RwsDef,
    TypeDef,
    VoidDef,
)
from .schema import InputObjectType, ListType, NonNullType, SchemaDoc, TypeExpr, named_of
from .surface import path_placeholders

MANIFEST_VERSION = "1"


class GenerationError(ValueError):
    pass


# -- transforms --------------------------------------------------------------


@dataclass(frozen=True)
class Transform:
    """One conversion step.

    kinds: identity, scalar-coerce (``scalar``), list (``item``),
    nested (``plan``), map-to-entry-list / entry-list-to-map (``plan`` names
    the entry type, ``key``/``value`` convert the parts).
    """

    kind: str
    scalar: str | None = None
    plan: str | None = None
    item: Transform | None = None
    key: Transform | None = None
    value: Transform | None = None

    def to_data(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.scalar is not None:
            out["scalar"] = self.scalar
        if self.plan is not None:
            out["plan"] = self.plan
        for name in ("item", "key", "value"):
            sub = getattr(self, name)
            if sub is not None:
                out[name] = sub.to_data()
        return out

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> Transform:
        sub = {k: cls.from_data(d[k]) for k in ("item", "key", "value") if k in d}
        return cls(kind=d["kind"], scalar=d.get("scalar"), plan=d.get("plan"), **sub)


IDENTITY = Transform("identity")

# extended scalars whose JSON form may need lexical normalization
COERCED_SCALARS = frozenset({"Long", "Short", "Byte", "BigInteger", "Double", "BigDecimal", "DateTime", "Date", "Time", "Char"})


@dataclass(frozen=True)
class LinkCall:
    """Backend call that fills a linked field from its parent object."""

    http_method: str
    path_template: str
    # (wire name, location, parent source field)
    params: tuple[tuple[str, str, str], ...]
    extract: tuple[str | None, ...]
    result: Transform
    source_id: str

    def to_data(self) -> dict[str, Any]:
        return {
            "httpMethod": self.http_method,
            "pathTemplate": self.path_template,
            "params": [{"sourceParam": w, "location": loc, "parentField": p} for w, loc, p in self.params],
            "extract": list(self.extract),
            "result": self.result.to_data(),
            "sourceId": self.source_id,
        }

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> LinkCall:
        return cls(
            http_method=d["httpMethod"],
            path_template=d["pathTemplate"],
            params=tuple((p["sourceParam"], p["location"], p["parentField"]) for p in d["params"]),
            extract=tuple(d["extract"]),
            result=Transform.from_data(d["result"]),
            source_id=d["sourceId"],
        )


@dataclass(frozen=True)
class MappingStep:
    source_field: str
    target_field: str
    transform: Transform
    link: LinkCall | None = None

    def to_data(self) -> dict[str, Any]:
        out = {"sourceField": self.source_field, "targetField": self.target_field, "transform": self.transform.to_data()}
        if self.link is not None:
            out["link"] = self.link.to_data()
        return out

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> MappingStep:
        link = LinkCall.from_data(d["link"]) if "link" in d else None
        return cls(d["sourceField"], d["targetField"], Transform.from_data(d["transform"]), link)


@dataclass(frozen=True)
class ObjectMappingPlan:
    graphql_type: str
    direction: str  # "out": REST -> GraphQL, "in": GraphQL input -> REST
    steps: tuple[MappingStep, ...]

    def step_for(self, target: str) -> MappingStep | None:
        key = "target_field" if self.direction == "out" else "source_field"
        return next((s for s in self.steps if getattr(s, key) == target), None)

    def to_data(self) -> dict[str, Any]:
        return {"graphqlType": self.graphql_type, "direction": self.direction, "steps": [s.to_data() for s in self.steps]}

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> ObjectMappingPlan:
        return cls(d["graphqlType"], d["direction"], tuple(MappingStep.from_data(s) for s in d["steps"]))


@dataclass(frozen=True)
class ParamBinding:
    gql_arg: str
    location: str  # path | query | body
    source_param: str
    transform: Transform = IDENTITY

    def to_data(self) -> dict[str, Any]:
        return {
            "gqlArg": self.gql_arg,
            "location": self.location,
            "sourceParam": self.source_param,
            "transform": self.transform.to_data(),
        }


@dataclass(frozen=True)
class BackendCall:
    http_method: str
    path_template: str
    param_bindings: tuple[ParamBinding, ...]

    def to_data(self) -> dict[str, Any]:
        return {
            "httpMethod": self.http_method,
            "pathTemplate": self.path_template,
            "paramBindings": [p.to_data() for p in self.param_bindings],
        }


@dataclass(frozen=True)
class Binding:
    root: str  # query | mutation
    field: str
    source_id: str
    backend: BackendCall | None  # None for the placeholder `_empty` query field
    result: Transform
    void_result: bool = False
    extract: tuple[str | None, ...] = ()

    @property
    def result_plan(self) -> str | None:
        t = self.result
        while t.kind == "list":
            t = t.item
        return t.plan

    def to_data(self) -> dict[str, Any]:
        return {
            "root": self.root,
            "field": self.field,
            "sourceId": self.source_id,
            "backend": self.backend.to_data() if self.backend else None,
            "result": self.result.to_data(),
            "resultPlan": self.result_plan,
            "voidResult": self.void_result,
            "extract": list(self.extract),
        }

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> Binding:
        b = d["backend"]
        backend = None
        if b is not None:
            backend = BackendCall(
                b["httpMethod"],
                b["pathTemplate"],
                tuple(
                    ParamBinding(p["gqlArg"], p["location"], p["sourceParam"], Transform.from_data(p["transform"]))
                    for p in b["paramBindings"]
                ),
            )
        return cls(d["root"], d["field"], d["sourceId"], backend, Transform.from_data(d["result"]), d["voidResult"], tuple(d["extract"]))


@dataclass
class BindingManifest:
    bindings: list[Binding] = field(default_factory=list)
    mapping_plans: dict[str, ObjectMappingPlan] = field(default_factory=dict)
    version: str = MANIFEST_VERSION

    def binding(self, root: str, name: str) -> Binding:
        for b in self.bindings:
            if b.root == root and b.field == name:
                return b
        raise KeyError(f"{root}.{name}")

    def to_data(self) -> dict[str, Any]:
        return {
            "bindingsVersion": self.version,
            "bindings": [b.to_data() for b in self.bindings],
            "mappingPlans": {k: p.to_data() for k, p in sorted(self.mapping_plans.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_data(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_data(cls, d: Mapping[str, Any]) -> BindingManifest:
        if d.get("bindingsVersion") != MANIFEST_VERSION:
            raise GenerationError(f"unsupported bindingsVersion {d.get('bindingsVersion')!r}")
        return cls(
            bindings=[Binding.from_data(b) for b in d["bindings"]],
            mapping_plans={k: ObjectMappingPlan.from_data(p) for k, p in d["mappingPlans"].items()},
        )

    @classmethod
    def from_json(cls, text: str) -> BindingManifest:
        return cls.from_data(json.loads(text))


# -- map/entry conversions (shared with the executor) ----------------------


def map_to_entry_list(value: Mapping[Any, Any]) -> list[dict[str, Any]]:
    """``{k: v}`` -> ``[{"key": k, "value": v}]`` in the map's own order."""
    return [{"key": k, "value": v} for k, v in value.items()]


def entry_list_to_map(entries: Iterable[Mapping[str, Any]]) -> dict[Any, Any]:
    out: dict[Any, Any] = {}
    for e in entries:
        out[e["key"]] = e["value"]
    return out


# -- plan construction -------------------------------------------------------


def _scalar_transform(t: LiteralDef, *, as_key: bool = False) -> Transform:
    name = t.scalar_kind.name
    # JSON object keys are always strings, so map keys always need coercion
    if as_key or name in COERCED_SCALARS:
        return Transform("scalar-coerce", scalar=name)
    return IDENTITY


@dataclass
class _Planner:
    model: DefModel
    plans: dict[str, ObjectMappingPlan] = field(default_factory=dict)

    def outbound(self, t: TypeDef, *, as_key: bool = False) -> Transform:
        if isinstance(t, NonNullDef):
            return self.outbound(t.inner, as_key=as_key)
        if isinstance(t, LiteralDef):
            return _scalar_transform(t, as_key=as_key)
        if isinstance(t, VoidDef):
            return Transform("void")
        if isinstance(t, ListDef):
            if isinstance(t.component, MapEntryDef):
                e = t.component
                self.entry_plan(e)
                return Transform(
                    "map-to-entry-list",
                    plan=e.entry_name,
                    key=self.outbound(e.key, as_key=True),
                    value=self.outbound(e.value),
                )
            return Transform("list", item=self.outbound(t.component))
        if isinstance(t, MapEntryDef):
            raise GenerationError("map entry outside a list")
        target = self.model.resolve(t)
        if isinstance(target, EnumDef):
            return Transform("scalar-coerce", scalar="enum") if as_key else IDENTITY
        if isinstance(target, LiteralDef):
            return _scalar_transform(target, as_key=as_key)
        self.object_plan(target)
        return Transform("nested", plan=target.name)

    def entry_plan(self, e: MapEntryDef) -> None:
        if e.entry_name in self.plans:
            return
        self.plans[e.entry_name] = ObjectMappingPlan(e.entry_name, "out", ())
        self.plans[e.entry_name] = ObjectMappingPlan(
            e.entry_name,
            "out",
            (
                MappingStep("key", "key", self.outbound(e.key, as_key=True)),
                MappingStep("value", "value", self.outbound(e.value)),
            ),
        )

    def object_plan(self, obj: ObjectDef | InterfaceDef) -> None:
        if obj.name in self.plans:
            return
        # placeholder first: self-references resolve to the name
        self.plans[obj.name] = ObjectMappingPlan(obj.name, "out", ())
        fields = obj.fields if isinstance(obj, ObjectDef) else obj.operations
        self.plans[obj.name] = ObjectMappingPlan(obj.name, "out", tuple(self.step(f) for f in fields))

    def step(self, f: FieldDef) -> MappingStep:
        transform = self.outbound(f.type)
        link = None
        if f.link is not None:
            link = self.link_call(f.link, transform)
        return MappingStep(f.wire_name, f.name, transform, link)

    def link_call(self, link: FieldLink, result: Transform) -> LinkCall:
        return LinkCall(link.http_method, link.path, link.params, link.extract, result, link.operation)

    def inbound(self, t: TypeDef, expr: TypeExpr, schema: SchemaDoc) -> Transform:
        if isinstance(expr, NonNullType):
            expr = expr.of
        if isinstance(t, NonNullDef):
            t = t.inner
        if isinstance(t, LiteralDef):
            return _scalar_transform(t)
        if isinstance(t, ListDef):
            if not isinstance(expr, ListType):
                raise GenerationError(f"argument shape mismatch: list vs {expr}")
            if isinstance(t.component, MapEntryDef):
                e = t.component
                name = named_of(expr.of)
                self.input_plan(e, name, schema)
                return Transform(
                    "entry-list-to-map",
                    plan=name,
                    key=self.inbound(e.key, _field_expr(schema, name, "key"), schema),
                    value=self.inbound(e.value, _field_expr(schema, name, "value"), schema),
                )
            return Transform("list", item=self.inbound(t.component, expr.of, schema))
        if isinstance(t, VoidDef):
            return IDENTITY
        target = self.model.resolve(t)
        if isinstance(target, ObjectDef):
            name = named_of(expr)
            self.input_plan(target, name, schema)
            return Transform("nested", plan=name)
        if isinstance(target, LiteralDef):
            return _scalar_transform(target)
        return IDENTITY

    def input_plan(self, obj: ObjectDef | MapEntryDef, name: str, schema: SchemaDoc) -> None:
        if name in self.plans:
            return
        decl = schema.type(name)
        if not isinstance(decl, InputObjectType):
            raise GenerationError(f"{name} is not an input object")
        self.plans[name] = ObjectMappingPlan(name, "in", ())
        if isinstance(obj, MapEntryDef):
            pairs = [("key", "key", obj.key), ("value", "value", obj.value)]
        else:
            pairs = [(f.name, f.wire_name, f.type) for f in obj.fields if f.link is None]
        steps = tuple(MappingStep(g, w, self.inbound(t, _field_expr(schema, name, g), schema)) for g, w, t in pairs)
        self.plans[name] = ObjectMappingPlan(name, "in", steps)


def _field_expr(schema: SchemaDoc, type_name: str, field_name: str) -> TypeExpr:
    for f in schema.fields_of(type_name) or ():
        if f.name == field_name:
            return f.type
    raise GenerationError(f"{type_name}.{field_name} is not in the schema")


def build_object_mapping(obj: ObjectDef, model: DefModel) -> ObjectMappingPlan:
    """Outbound plan for ``obj``; nested objects are referenced by name."""
    planner = _Planner(model)
    planner.object_plan(obj)
    return planner.plans[obj.name]


def _find_operation(model: DefModel, name: str, root: str) -> OperationDef:
    rws = RwsDef.READ if root == "query" else RwsDef.WRITE
    try:
        return model.operation(name, rws)
    except KeyError:
        raise GenerationError(f"schema field {root}.{name} has no operation in the model") from None


def generate_bindings(model: DefModel, schema: SchemaDoc) -> BindingManifest:
    planner = _Planner(model)
    wrappers: dict[str, list[str | None]] = {}
    for w in model.wrapper_log:
        wrappers.setdefault(w.operation, []).append(w.payload_field)
    manifest = BindingManifest()
    for root, gf in schema.root_fields():
        if root == "query" and gf.name == "_empty" and not any(op.name == "_empty" for op in model.operations):
            manifest.bindings.append(Binding(root, gf.name, "", None, IDENTITY))
            continue
        op = _find_operation(model, gf.name, root)
        params = []
        for p in op.params:
            arg = gf.arg(p.name)
            if arg is None:
                raise GenerationError(f"{root}.{gf.name} lacks argument {p.name}")
            params.append(ParamBinding(p.name, p.location, p.wire_name, planner.inbound(p.type, arg.type, schema)))
        manifest.bindings.append(
            Binding(
                root=root,
                field=gf.name,
                source_id=op.source_id,
                backend=BackendCall(op.http_method, op.path, tuple(params)),
                result=planner.outbound(op.output),
                void_result=isinstance(op.output, VoidDef),
                extract=tuple(wrappers.get(op.source_id, ())),
            )
        )
    manifest.mapping_plans = dict(sorted(planner.plans.items()))
    return manifest


def check_manifest(manifest: BindingManifest, schema: SchemaDoc) -> list[str]:
    """Invariant breaches of ``manifest`` against ``schema`` (empty when sound)."""
    out = []
    seen = set()
    for b in manifest.bindings:
        key = (b.root, b.field)
        if key in seen:
            out.append(f"duplicate binding {b.root}.{b.field}")
        seen.add(key)
        if b.backend is not None:
            paths = [p.source_param for p in b.backend.param_bindings if p.location == "path"]
            if sorted(paths) != sorted(path_placeholders(b.backend.path_template)):
                out.append(f"{b.root}.{b.field}: path params {paths} do not cover {b.backend.path_template}")
            if sum(p.location == "body" for p in b.backend.param_bindings) > 1:
                out.append(f"{b.root}.{b.field}: more than one body binding")
        for name in _plan_refs(b.result):
            if name not in manifest.mapping_plans:
                out.append(f"{b.root}.{b.field}: missing plan {name}")
    expected = {(root, f.name) for root, f in schema.root_fields()}
    for missing in sorted(expected - seen):
        out.append(f"no binding for {missing[0]}.{missing[1]}")
    for name, plan in manifest.mapping_plans.items():
        fields = schema.fields_of(name)
        if fields is None:
            out.append(f"plan {name} has no schema type")
            continue
        side = "target_field" if plan.direction == "out" else "source_field"
        if sorted(getattr(s, side) for s in plan.steps) != sorted(f.name for f in fields):
            out.append(f"plan {name} does not cover the fields of {name}")
        for s in plan.steps:
            for ref in _plan_refs(s.transform):
                if ref not in manifest.mapping_plans:
                    out.append(f"plan {name}: missing plan {ref}")
    return out


def _plan_refs(t: Transform) -> list[str]:
    out = [t.plan] if t.plan else []
    for sub in (t.item, t.key, t.value):
        if sub is not None:
            out.extend(_plan_refs(sub))
    return out

