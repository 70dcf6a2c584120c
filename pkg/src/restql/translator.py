"""DefModel -> GraphQL SchemaDoc."""

from __future__ import annotations

from dataclasses import dataclass, field

from .defmodel import (
    BUILTIN_SCALARS,
    DefModel,
    EnumDef,
    FieldDef,
    InterfaceDef,
    ListDef,
    LiteralDef,
    MapEntryDef,
    NonNullDef,
    ObjectDef,
    RwsDef,
    TypeDef,
    TypeRef,
    VoidDef,
)
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
    ScalarType,
    SchemaDoc,
    TypeExpr,
)

EMPTY_FIELD = GqlField("_empty", NamedType("Boolean"))


def output_expr(t: TypeDef) -> TypeExpr:
    """Type expression for ``t`` in an output (field or result) position."""
    if isinstance(t, LiteralDef):
        return NamedType(t.scalar_kind.name)
    if isinstance(t, VoidDef):
        return NamedType("Boolean")
    if isinstance(t, NonNullDef):
        inner = output_expr(t.inner)
        return inner if isinstance(t.inner, VoidDef) else NonNullType(inner)
    if isinstance(t, ListDef):
        return ListType(output_expr(t.component))
    if isinstance(t, MapEntryDef):
        return NamedType(t.entry_name)
    if isinstance(t, TypeRef):
        return NamedType(t.name)
    return NamedType(t.name)


@dataclass
class _Translation:
    model: DefModel
    input_names: dict[str, str] = field(default_factory=dict)
    inputs: list[InputObjectType] = field(default_factory=list)
    scalars: set[str] = field(default_factory=set)
    taken: set[str] = field(default_factory=set)

    def input_name(self, name: str) -> str:
        """`<Name>Input`, numbered when that name is already taken."""
        if name in self.input_names:
            return self.input_names[name]
        base = f"{name}Input"
        candidate, n = base, 2
        while candidate in self.taken:
            candidate, n = f"{base}{n}", n + 1
        self.taken.add(candidate)
        self.input_names[name] = candidate
        target = self.model.types.get(name)
        # reserve the name before recursing so self-references terminate
        self.inputs.append(InputObjectType(candidate, ()))
        index = len(self.inputs) - 1
        if isinstance(target, MapEntryDef):
            fields = (GqlField("key", self.input_expr(target.key)), GqlField("value", self.input_expr(target.value)))
        else:
            fields = tuple(to_input_fields(target, self))
        self.inputs[index] = InputObjectType(candidate, fields or (EMPTY_FIELD,))
        return candidate

    def input_expr(self, t: TypeDef) -> TypeExpr:
        if isinstance(t, LiteralDef):
            self.note_scalar(t)
            return NamedType(t.scalar_kind.name)
        if isinstance(t, NonNullDef):
            return NonNullType(self.input_expr(t.inner))
        if isinstance(t, ListDef):
            return ListType(self.input_expr(t.component))
        if isinstance(t, VoidDef):
            return NamedType("Boolean")
        name = t.entry_name if isinstance(t, MapEntryDef) else t.name
        target = self.model.types.get(name)
        if isinstance(target, (ObjectDef, MapEntryDef)):
            return NamedType(self.input_name(name))
        if isinstance(target, LiteralDef):
            self.note_scalar(target)
        return NamedType(name)

    def note_scalar(self, t: LiteralDef) -> None:
        if t.scalar_kind.name not in BUILTIN_SCALARS:
            self.scalars.add(t.scalar_kind.name)

    def output(self, t: TypeDef) -> TypeExpr:
        for lit in _literals(t):
            self.note_scalar(lit)
        return output_expr(t)


def _literals(t: TypeDef):
    if isinstance(t, LiteralDef):
        yield t
    elif isinstance(t, NonNullDef):
        yield from _literals(t.inner)
    elif isinstance(t, ListDef):
        yield from _literals(t.component)
    elif isinstance(t, MapEntryDef):
        yield from _literals(t.key)
        yield from _literals(t.value)


def to_input_fields(obj: ObjectDef, tr: _Translation) -> list[GqlField]:
    # linked fields are resolved by another call, so clients cannot send them
    return [GqlField(f.name, tr.input_expr(f.type)) for f in obj.fields if f.link is None]


def to_input_type(obj: ObjectDef, model: DefModel | None = None) -> InputObjectType:
    """Input-object counterpart of ``obj`` (nested objects use their inputs too)."""
    model = model or DefModel(types={obj.name: obj})
    model.types.setdefault(obj.name, obj)
    tr = _Translation(model, taken=set(model.types))
    tr.input_name(obj.name)
    return tr.inputs[0]


def _gql_field(f: FieldDef, tr: _Translation) -> GqlField:
    return GqlField(f.name, tr.output(f.type))


def translate(model: DefModel) -> SchemaDoc:
    tr = _Translation(model)
    tr.taken = set(model.types) | {"Query", "Mutation", "Subscription"}
    implemented = {i for t in model.types.values() if isinstance(t, ObjectDef) for i in t.interfaces}

    query, mutation = [], []
    for op in model.operations:
        args = tuple(GqlArg(p.name, tr.input_expr(p.type)) for p in op.params)
        gf = GqlField(op.name, tr.output(op.output), args)
        (query if op.rws is RwsDef.READ else mutation).append(gf)
    if not query:
        query.append(EMPTY_FIELD)

    decls: list = []
    for name, t in model.types.items():
        if isinstance(t, ObjectDef):
            decls.append(ObjectType(name, tuple(_gql_field(f, tr) for f in t.fields), t.interfaces))
        elif isinstance(t, InterfaceDef):
            fields = tuple(_gql_field(f, tr) for f in t.operations)
            decls.append(InterfaceType(name, fields) if name in implemented else ObjectType(name, fields))
        elif isinstance(t, EnumDef):
            decls.append(EnumType(name, t.values))
        elif isinstance(t, MapEntryDef):
            decls.append(ObjectType(name, (GqlField("key", tr.output(t.key)), GqlField("value", tr.output(t.value)))))
        elif isinstance(t, LiteralDef):
            tr.note_scalar(t)
    decls.extend(ScalarType(s) for s in tr.scalars)
    decls.extend(tr.inputs)
    return SchemaDoc(types=tuple(decls), query=tuple(query), mutation=tuple(mutation)).canonical()
