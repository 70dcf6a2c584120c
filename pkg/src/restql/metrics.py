"""Conversion quality metrics: failure rate, invalid schemas, type mismatches.

The type comparator walks each source operation next to the schema field it
became and checks that every source type landed on the GraphQL shape it is
supposed to: same scalar precision, list for list, entry list for map, enum
with the same values, and objects whose fields match one by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .defmodel import UNMAPPED_SCALAR
from .diagnostics import CAUSE_ORDER, MappingCause, count_by_cause
from .generator import BindingManifest, ObjectMappingPlan
from .pipeline import PipelineResult
from .processor import ProcessorConfig, substitute, unwrap_wrapper
from .schema import EnumType, InputObjectType, InterfaceType, ListType, NamedType, NonNullType, ObjectType, SchemaDoc, TypeExpr
from .surface import ApiSurface, ListOf, MapOf, Named, NullableMarker, Opaque, Primitive, SourceType, TypeDecl, Void, source_id

# The scalar each source primitive must become.  Formats not listed keep the
# bare primitive's scalar for strings/booleans and have no faithful target for
# numbers (those must surface as Unmapped, never as a narrower scalar).
FIDELITY: dict[tuple[str, str | None], str] = {
    ("integer", None): "Int",
    ("integer", "int8"): "Byte",
    ("integer", "int16"): "Short",
    ("integer", "int32"): "Int",
    ("integer", "int64"): "Long",
    ("integer", "biginteger"): "BigInteger",
    ("number", None): "Float",
    ("number", "float"): "Float",
    ("number", "double"): "Double",
    ("number", "decimal"): "BigDecimal",
    ("number", "bigdecimal"): "BigDecimal",
    ("string", None): "String",
    ("string", "date"): "Date",
    ("string", "time"): "Time",
    ("string", "date-time"): "DateTime",
    ("string", "char"): "Char",
    ("boolean", None): "Boolean",
}


def expected_scalar(p: Primitive) -> str:
    fmt = p.format.lower() if p.format else None
    if (p.name, fmt) in FIDELITY:
        return FIDELITY[(p.name, fmt)]
    if p.name in ("string", "boolean"):
        return FIDELITY[(p.name, None)]
    return UNMAPPED_SCALAR


@dataclass(frozen=True)
class Mismatch:
    subject: str
    source: str
    schema: str
    detail: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.detail} (source {self.source}, schema {self.schema})"


@dataclass
class _Comparator:
    surface: ApiSurface
    schema: SchemaDoc
    manifest: BindingManifest
    config: ProcessorConfig
    mismatches: list[Mismatch] = field(default_factory=list)
    unmapped: int = 0
    _seen: set[tuple[str, str]] = field(default_factory=set)

    def fail(self, subject: str, src: SourceType, expr: TypeExpr, detail: str) -> None:
        self.mismatches.append(Mismatch(subject, repr(src), str(expr), detail))

    def compare(self, src: SourceType, expr: TypeExpr, subject: str, direction: str) -> None:
        if isinstance(src, NullableMarker):
            return self.compare(src.inner, expr, subject, direction)
        if isinstance(expr, NonNullType):
            expr = expr.of
        if isinstance(expr, NamedType) and expr.name == UNMAPPED_SCALAR:
            # accepted only where no faithful target exists
            if isinstance(src, Primitive) and expected_scalar(src) != UNMAPPED_SCALAR:
                self.fail(subject, src, expr, f"primitive degraded to {UNMAPPED_SCALAR}")
            self.unmapped += 1
            return
        if isinstance(src, Primitive):
            want = expected_scalar(src)
            if not (isinstance(expr, NamedType) and expr.name == want):
                self.fail(subject, src, expr, f"expected scalar {want}")
        elif isinstance(src, Void):
            if not (isinstance(expr, NamedType) and expr.name == "Boolean"):
                self.fail(subject, src, expr, "void must be a nullable Boolean")
        elif isinstance(src, ListOf):
            if not isinstance(expr, ListType):
                self.fail(subject, src, expr, "list became a non-list")
                return
            self.compare(src.component, expr.of, subject + "[]", direction)
        elif isinstance(src, MapOf):
            self.compare_map(src, expr, subject, direction)
        elif isinstance(src, Opaque):
            self.fail(subject, src, expr, "opaque source type must be Unmapped")
        elif isinstance(src, Named):
            self.compare_named(src, expr, subject, direction)

    def compare_map(self, src: MapOf, expr: TypeExpr, subject: str, direction: str) -> None:
        inner = expr.of.of if isinstance(expr, ListType) and isinstance(expr.of, NonNullType) else getattr(expr, "of", None)
        if not isinstance(expr, ListType) or not isinstance(inner, NamedType):
            self.fail(subject, src, expr, "map must become a list of entries")
            return
        fields = {f.name: f.type for f in self.schema.fields_of(inner.name) or ()}
        if set(fields) != {"key", "value"}:
            self.fail(subject, src, expr, f"entry type {inner.name} must have exactly key and value")
            return
        self.compare(src.key, fields["key"], subject + ".key", direction)
        self.compare(src.value, fields["value"], subject + ".value", direction)

    def compare_named(self, src: Named, expr: TypeExpr, subject: str, direction: str) -> None:
        decl = self.surface.type_decls.get(src.name)
        custom = self.config.custom_scalar(src.name)
        if custom is not None:
            if not (isinstance(expr, NamedType) and expr.name == custom):
                self.fail(subject, src, expr, f"expected custom scalar {custom}")
            return
        if not isinstance(expr, NamedType):
            self.fail(subject, src, expr, "named type became a list")
            return
        target = self.schema.type(expr.name)
        if decl is None:
            self.fail(subject, src, expr, "undeclared source type must be Unmapped")
            return
        if decl.kind == "enum":
            if not isinstance(target, EnumType) or tuple(target.values) != tuple(decl.values):
                self.fail(subject, src, expr, "enum values differ")
            return
        key = (repr(src), expr.name)
        if key in self._seen:
            return
        self._seen.add(key)
        if direction == "in":
            if not isinstance(target, InputObjectType):
                self.fail(subject, src, expr, "object argument must be an input object")
                return
        elif decl.kind == "interface":
            if not isinstance(target, (InterfaceType, ObjectType)):
                self.fail(subject, src, expr, "interface must be an interface or object type")
                return
        elif not isinstance(target, ObjectType):
            self.fail(subject, src, expr, "object must be an object type")
            return
        self.compare_fields(src, decl, expr.name, subject, direction)

    def compare_fields(self, src: Named, decl: TypeDecl, type_name: str, subject: str, direction: str) -> None:
        env = dict(zip(decl.type_params, src.args))
        plan = self.manifest.mapping_plans.get(type_name)
        schema_fields = {f.name: f.type for f in self.schema.fields_of(type_name) or ()}
        members = [(f.name, f.type, f.transient, f.link) for f in decl.fields]
        members += [(m.name, m.type, False, None) for m in decl.operations]
        for name, ftype, transient, link in members:
            gql_name = _gql_field(plan, name, direction)
            if transient or (link is not None and direction == "in"):
                if gql_name is not None:
                    self.fail(f"{subject}.{name}", ftype, NamedType(type_name), "field should not be exposed")
                continue
            if gql_name is None or gql_name not in schema_fields:
                self.fail(f"{subject}.{name}", ftype, NamedType(type_name), "source field missing from schema type")
                continue
            ftype = substitute(ftype, env)
            if link is not None:
                ftype = unwrap_wrapper(ftype, self.config)
            self.compare(ftype, schema_fields[gql_name], f"{subject}.{name}", direction)


def _gql_field(plan: ObjectMappingPlan | None, source_name: str, direction: str) -> str | None:
    if plan is None:
        return None
    for step in plan.steps:
        if direction == "out" and step.source_field == source_name:
            return step.target_field
        if direction == "in" and step.target_field == source_name:
            return step.source_field
    return None


@dataclass(frozen=True)
class FidelityReport:
    mismatches: tuple[Mismatch, ...]
    checked_operations: int
    unmapped: int


def compare_types(result: PipelineResult, config: ProcessorConfig) -> FidelityReport:
    """Check every converted operation's argument and result types."""
    cmp = _Comparator(result.surface, result.schema, result.manifest, config)
    by_source = {b.source_id: b for b in result.manifest.bindings}
    by_op = {op.source_id: op for op in result.model.operations}
    checked = 0
    for svc, op in result.surface.iter_operations():
        sid = source_id(svc.namespace, op)
        binding, model_op = by_source.get(sid), by_op.get(sid)
        if binding is None or model_op is None:
            continue  # skipped in strict mode
        checked += 1
        root = "query" if binding.root == "query" else "mutation"
        gql_field = next(f for f in result.schema.root(root) if f.name == binding.field)
        subject = f"{binding.root}.{binding.field}"
        cmp.compare(unwrap_wrapper(op.returns, config), gql_field.type, subject, "out")
        params = {(pb.source_param, pb.location): pb.gql_arg for pb in binding.backend.param_bindings}
        for p in op.params:
            arg_name = params.get((p.name, p.location))
            arg = gql_field.arg(arg_name) if arg_name else None
            if arg is None:
                cmp.fail(f"{subject}({p.name})", p.type, NamedType("-"), "parameter missing from schema field")
                continue
            cmp.compare(p.type, arg.type, f"{subject}({p.name})", "in")
    return FidelityReport(tuple(cmp.mismatches), checked, cmp.unmapped)


# -- corpus-level summary ----------------------------------------------------


@dataclass(frozen=True)
class ConversionMetrics:
    name: str
    operations: int
    converted: int
    skipped: int
    invalid_schema: bool
    type_mismatches: int
    causes: dict[MappingCause, int]

    @property
    def failure_rate(self) -> float:
        return self.skipped / self.operations if self.operations else 0.0


def measure(name: str, result: PipelineResult, config: ProcessorConfig) -> ConversionMetrics:
    return ConversionMetrics(
        name=name,
        operations=result.surface.operation_count,
        converted=len(result.model.operations),
        skipped=result.skipped,
        invalid_schema=bool(result.schema_violations),
        type_mismatches=len(compare_types(result, config).mismatches),
        causes=count_by_cause(result.diagnostics),
    )


def format_metrics(rows: Iterable[ConversionMetrics]) -> str:
    rows = list(rows)
    head = ["fixture", "ops", "converted", "failure", "invalid", "mismatch"] + [c.value for c in CAUSE_ORDER]
    table = [
        [r.name, str(r.operations), str(r.converted), f"{r.failure_rate:.0%}", "yes" if r.invalid_schema else "no", str(r.type_mismatches)]
        + [str(r.causes[c]) for c in CAUSE_ORDER]
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *table)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *table]) + "\n"
