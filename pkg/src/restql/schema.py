"""GraphQL schema document (the translator's output)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .defmodel import BUILTIN_SCALARS


@dataclass(frozen=True)
class NamedType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ListType:
    of: TypeExpr

    def __str__(self) -> str:
        return f"[{self.of}]"


@dataclass(frozen=True)
class NonNullType:
    of: TypeExpr  # NamedType or ListType

    def __str__(self) -> str:
        return f"{self.of}!"


TypeExpr = Union[NamedType, ListType, NonNullType]


def named_of(t: TypeExpr) -> str:
    while not isinstance(t, NamedType):
        t = t.of
    return t.name


def strip_non_null(t: TypeExpr) -> TypeExpr:
    return t.of if isinstance(t, NonNullType) else t


@dataclass(frozen=True)
class GqlArg:
    name: str
    type: TypeExpr


@dataclass(frozen=True)
class GqlField:
    name: str
    type: TypeExpr
    args: tuple[GqlArg, ...] = ()

    def arg(self, name: str) -> GqlArg | None:
        return next((a for a in self.args if a.name == name), None)


@dataclass(frozen=True)
class ObjectType:
    name: str
    fields: tuple[GqlField, ...]
    interfaces: tuple[str, ...] = ()


@dataclass(frozen=True)
class InterfaceType:
    name: str
    fields: tuple[GqlField, ...]


@dataclass(frozen=True)
class InputObjectType:
    name: str
    fields: tuple[GqlField, ...]


@dataclass(frozen=True)
class EnumType:
    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class ScalarType:
    name: str


TypeDecl = Union[ObjectType, InterfaceType, InputObjectType, EnumType, ScalarType]

# declaration sections, in SDL printing order
SECTION_ORDER = (ScalarType, EnumType, InterfaceType, ObjectType, InputObjectType)


@dataclass(frozen=True)
class SchemaDoc:
    """Named declarations plus the two operation roots.

    ``types`` is a tuple rather than a dict so that duplicate declarations
    (e.g. from a hand-written SDL file) survive long enough to be reported.
    """

    types: tuple[TypeDecl, ...] = ()
    query: tuple[GqlField, ...] = ()
    mutation: tuple[GqlField, ...] = ()
    # False when an SDL document had no `type Query` block at all
    has_query: bool = True

    def canonical(self) -> SchemaDoc:
        """Same schema with declarations in printing order."""
        ordered = sorted(self.types, key=lambda t: (SECTION_ORDER.index(type(t)), t.name))
        return SchemaDoc(tuple(ordered), self.query, self.mutation, self.has_query)

    def type(self, name: str) -> TypeDecl | None:
        for t in self.types:
            if t.name == name:
                return t
        return None

    def type_map(self) -> dict[str, TypeDecl]:
        out: dict[str, TypeDecl] = {}
        for t in self.types:
            out.setdefault(t.name, t)
        return out

    def root(self, kind: str) -> tuple[GqlField, ...]:
        return self.query if kind == "query" else self.mutation

    def root_fields(self) -> Iterator[tuple[str, GqlField]]:
        for f in self.query:
            yield "query", f
        for f in self.mutation:
            yield "mutation", f

    def fields_of(self, type_name: str) -> tuple[GqlField, ...] | None:
        if type_name == "Query":
            return self.query
        if type_name == "Mutation" and self.mutation:
            return self.mutation
        t = self.type(type_name)
        if isinstance(t, (ObjectType, InterfaceType, InputObjectType)):
            return t.fields
        return None

    def is_leaf(self, type_name: str) -> bool:
        return type_name in BUILTIN_SCALARS or isinstance(self.type(type_name), (ScalarType, EnumType))


def builtin_scalar(name: str) -> bool:
    return name in BUILTIN_SCALARS

