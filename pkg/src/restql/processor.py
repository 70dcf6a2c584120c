"""ApiSurface -> DefModel.

Strict mode drops any operation that hits a mapping problem and explains
why; non-strict mode repairs the problem in place (rename, synthesized
field, or opaque ``Unmapped`` scalar) and records what it did.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

from .defmodel import (
    BUILTIN_SCALARS,
    EXTENDED_SCALARS,
    NAME_RE,
    UNMAPPED_SCALAR,
    DefModel,
    EnumDef,
    FieldDef,
    FieldLink,
    InterfaceDef,
    ListDef,
    LiteralDef,
    MapEntryDef,
    NamedDef,
    NamingError,
    NonNullDef,
    ObjectDef,
    OperationDef,
    ParamDef,
    RenameRecord,
    RwsDef,
    ScalarKind,
    SynthesisRecord,
    TypeDef,
    TypeRef,
    VoidDef,
    WrapperRecord,
    canonical_name,
    non_null,
    normalize_name,
    nullable,
    simple_name,
    type_label,
)
from .diagnostics import (
    CATEGORY_BY_CAUSE,
    Diagnostic,
    DiagnosticSink,
    MappingCause,
    TraceFrame,
)
from .surface import (
    ApiSurface,
    ListOf,
    MapOf,
    Named,
    NullableMarker,
    Opaque,
    Primitive,
    Service,
    SourceField,
    SourceLocation,
    SourceOperation,
    SourceType,
    TypeDecl,
    Void,
    source_id,
    source_type_label,
)

ROOT_NAMES = ("Query", "Mutation", "Subscription")
STRICT, NON_STRICT = "strict", "non-strict"
EMPTY_FIELD = "_empty"

# (primitive name, format) -> scalar.  A missing format uses the None entry.
SCALAR_TABLE: dict[tuple[str, str | None], str] = {
    ("integer", None): "Int",
    ("integer", "int32"): "Int",
    ("integer", "int64"): "Long",
    ("integer", "int16"): "Short",
    ("integer", "int8"): "Byte",
    ("integer", "biginteger"): "BigInteger",
    ("number", None): "Float",
    ("number", "float"): "Float",
    ("number", "double"): "Double",
    ("number", "decimal"): "BigDecimal",
    ("number", "bigdecimal"): "BigDecimal",
    ("string", None): "String",
    ("string", "date-time"): "DateTime",
    ("string", "date"): "Date",
    ("string", "time"): "Time",
    ("string", "char"): "Char",
    ("boolean", None): "Boolean",
}


def scalar_for(p: Primitive) -> str | None:
    """Scalar name for a primitive, or None when its precision is unknown.

    Unrecognised string formats (email, uuid, ...) only annotate a string, so
    they stay ``String``; an unrecognised numeric format could be wider than
    any scalar we would pick, so it is reported instead of guessed.
    """
    hit = SCALAR_TABLE.get((p.name, p.format.lower() if p.format else None))
    if hit is None and p.name in ("string", "boolean"):
        return SCALAR_TABLE[(p.name, None)]
    return hit


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProcessorConfig:
    mode: str = NON_STRICT
    wrapper_names: tuple[str, ...] = ()
    # wrapper -> JSON field holding the payload; absent means the wrapper is
    # transport-only and the HTTP body already is the payload
    wrapper_payload_fields: tuple[tuple[str, str], ...] = ()
    custom_scalar_map: tuple[tuple[str, str], ...] = ()
    recursion_depth_limit: int = 64

    def __post_init__(self) -> None:
        if self.mode not in (STRICT, NON_STRICT):
            raise ConfigError(f"mode must be 'strict' or 'non-strict', got {self.mode!r}")
        if len(set(self.wrapper_names)) != len(self.wrapper_names):
            raise ConfigError("wrapper names must be distinct")
        if self.recursion_depth_limit < 2:
            raise ConfigError("recursion depth limit must be at least 2")
        for _, scalar in self.custom_scalar_map:
            if scalar in BUILTIN_SCALARS or scalar in EXTENDED_SCALARS or scalar == UNMAPPED_SCALAR:
                raise ConfigError(f"custom scalar {scalar!r} shadows a predefined scalar")
            if not NAME_RE.match(scalar):
                raise ConfigError(f"custom scalar {scalar!r} is not a GraphQL name")

    @property
    def strict(self) -> bool:
        return self.mode == STRICT

    def payload_field(self, wrapper: str) -> str | None:
        return dict(self.wrapper_payload_fields).get(wrapper)

    def custom_scalar(self, qname: str) -> str | None:
        return dict(self.custom_scalar_map).get(qname)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ProcessorConfig:
        known = {"mode", "wrappers", "wrapper_fields", "custom_scalars", "depth_limit"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(
            mode=data.get("mode", NON_STRICT),
            wrapper_names=tuple(data.get("wrappers", ())),
            wrapper_payload_fields=tuple(sorted(dict(data.get("wrapper_fields", {})).items())),
            custom_scalar_map=tuple(sorted(dict(data.get("custom_scalars", {})).items())),
            recursion_depth_limit=int(data.get("depth_limit", 64)),
        )

    @classmethod
    def load(cls, path: str | Path) -> ProcessorConfig:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".toml":
            try:
                import tomllib
            except ImportError:  # Python < 3.11
                import tomli as tomllib
            return cls.from_mapping(tomllib.loads(text))
        return cls.from_mapping(json.loads(text))


@dataclass
class ProcessResult:
    model: DefModel
    diagnostics: list[Diagnostic]

    @property
    def skipped(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.skipped]


class MappingIssue(Exception):
    def __init__(self, cause: MappingCause, subject: str, detail: str, trace: tuple[TraceFrame, ...] = ()) -> None:
        super().__init__(f"{cause.value}: {subject}: {detail}")
        self.cause = cause
        self.subject = subject
        self.detail = detail
        self.trace = trace
        self.field_less = False


# -- small public operations -------------------------------------------------


def classify_operation(http_method: str) -> RwsDef:
    return RwsDef.READ if http_method.upper() == "GET" else RwsDef.WRITE


def unwrap_wrapper(t: SourceType, config: ProcessorConfig, log: list[WrapperRecord] | None = None, operation: str = "") -> SourceType:
    """Strip configured wrapper types until a non-wrapper remains."""
    while isinstance(t, Named) and t.name in config.wrapper_names:
        if len(t.args) != 1:
            raise MappingIssue(
                MappingCause.INVALID, t.name, f"wrapper {t.name} used with {len(t.args)} type arguments (expected 1)"
            )
        if log is not None:
            log.append(WrapperRecord(operation, t.name, config.payload_field(t.name)))
        t = t.args[0]
    return t


@dataclass(frozen=True)
class Candidate:
    kind: str  # "type" | "operation"
    qualified: str
    name: str
    signature: str = ""
    root: str = ""


@dataclass(frozen=True)
class ConflictGroup:
    kind: str  # "type" | "overload" | "reserved"
    name: str
    members: tuple[Candidate, ...]


def detect_conflicts(candidates: Iterable[Candidate], reserved: Iterable[str] = ROOT_NAMES) -> list[ConflictGroup]:
    reserved = set(reserved)
    by_type: dict[str, dict[str, Candidate]] = {}
    by_op: dict[tuple[str, str], list[Candidate]] = {}
    for c in candidates:
        if c.kind == "type":
            by_type.setdefault(c.name, {}).setdefault(c.qualified, c)
        else:
            by_op.setdefault((c.root, c.name), []).append(c)
    groups = []
    for name, members in by_type.items():
        if name in reserved:
            groups.append(ConflictGroup("reserved", name, tuple(members.values())))
        elif len(members) > 1:
            groups.append(ConflictGroup("type", name, tuple(members.values())))
    for (_, name), members in by_op.items():
        if len(members) > 1:
            groups.append(ConflictGroup("overload", name, tuple(members)))
    return groups


@dataclass(frozen=True)
class Mitigation:
    action: str  # skip | rename | synthesize-field | substitute-scalar
    strategy: str
    skipped: bool


def mitigate(item: str, cause: MappingCause, mode: str, *, rename_to: str | None = None, field_less: bool = False) -> Mitigation:
    """Decide how a mapping problem is handled in ``mode``.

    The strategy text always describes the non-strict repair, so strict-mode
    skips tell the user what would have happened.
    """
    if cause is MappingCause.CONFLICT:
        action, text = "rename", f"rename {item} to {rename_to or '<qualified name>'}"
    elif cause is MappingCause.INVALID and field_less:
        action, text = "synthesize-field", f"synthesize nullable field `{EMPTY_FIELD}: Boolean` on {item}"
    elif cause is MappingCause.MISSING:
        action = "substitute-scalar"
        text = f"substitute opaque scalar {UNMAPPED_SCALAR} for {item} (no declaration found; declare it to map it)"
    else:
        action, text = "substitute-scalar", f"substitute opaque scalar {UNMAPPED_SCALAR} for {item}"
    if mode == STRICT:
        return Mitigation("skip", text, True)
    return Mitigation(action, text, False)


# -- labels used by overload renaming ---------------------------------------


def _display(t: SourceType) -> str:
    if isinstance(t, Primitive):
        if t.format is None:
            return t.name.capitalize()
        return scalar_for(t) or _camel(t.format)
    if isinstance(t, Named):
        base = _camel(simple_name(t.name))
        if t.args:
            return base + "Of" + "".join(_display(a) for a in t.args)
        return base
    if isinstance(t, ListOf):
        return "ListOf" + _display(t.component)
    if isinstance(t, MapOf):
        return "MapOf" + _display(t.key) + _display(t.value)
    if isinstance(t, Void):
        return "Void"
    if isinstance(t, NullableMarker):
        return _display(t.inner)
    return "Opaque"


def _camel(text: str) -> str:
    out, up = [], True
    for ch in text:
        if not ch.isalnum():
            up = True
            continue
        out.append(ch.upper() if up else ch)
        up = False
    return "".join(out)


def overload_name(name: str, params: Iterable[SourceType], returns: SourceType) -> str:
    labels = "".join(_display(p) for p in params)
    using = f"Using{labels}" if labels else ""
    return f"{name}{using}Returns{_display(returns)}"


def substitute(t: SourceType, env: Mapping[str, SourceType]) -> SourceType:
    if isinstance(t, Named):
        if not t.args and t.name in env:
            return env[t.name]
        return Named(t.name, tuple(substitute(a, env) for a in t.args))
    if isinstance(t, ListOf):
        return ListOf(substitute(t.component, env))
    if isinstance(t, MapOf):
        return MapOf(substitute(t.key, env), substitute(t.value, env))
    if isinstance(t, NullableMarker):
        return NullableMarker(substitute(t.inner, env), t.required)
    return t


# -- the processor -----------------------------------------------------------


@dataclass
class _OpCtx:
    service: Service
    op: SourceOperation
    sid: str
    rws: RwsDef
    op_name: str = ""


@dataclass
class _Processor:
    surface: ApiSurface
    config: ProcessorConfig
    sink: DiagnosticSink = field(default_factory=DiagnosticSink)
    model: DefModel = field(default_factory=DefModel)
    names: dict[str, tuple] = field(default_factory=dict)
    type_names: dict[str, str] = field(default_factory=dict)
    memo: dict[tuple, str] = field(default_factory=dict)
    trace: list[TraceFrame] = field(default_factory=list)
    current: _OpCtx | None = None

    @property
    def decls(self) -> dict[str, TypeDecl]:
        return self.surface.type_decls

    # -- names ---------------------------------------------------------------

    def claim(self, name: str, key: tuple, original: str, kind: str = "type") -> str:
        owner = self.names.get(name)
        if owner is None or owner == key:
            self.names[name] = key
            return name
        if self.config.strict:
            raise MappingIssue(MappingCause.CONFLICT, original, f"name {name} is already used by {owner[-1]}", self._trace())
        n = 2
        while f"{name}{n}" in self.names and self.names[f"{name}{n}"] != key:
            n += 1
        assigned = f"{name}{n}"
        self.names[assigned] = key
        self._record_rename(kind, original, assigned, name)
        return assigned

    def _record_rename(self, kind: str, original: str, assigned: str, wanted: str) -> None:
        self.model.rename_log.append(RenameRecord(kind, original, assigned, MappingCause.CONFLICT.value))
        m = mitigate(original, MappingCause.CONFLICT, self.config.mode, rename_to=assigned)
        self._emit(
            MappingCause.CONFLICT,
            f"{original} collides with another definition named {wanted}",
            m,
            (TraceFrame("conflicts", original),),
        )

    def _trace(self) -> tuple[TraceFrame, ...]:
        frames = []
        if self.current is not None:
            frames.append(TraceFrame("ingest", self.current.sid))
        return tuple(frames + self.trace)

    def _location(self) -> SourceLocation:
        if self.current is not None:
            return self.current.op.location
        return SourceLocation(self.surface.metadata.get("source", "<surface>"))

    def _emit(self, cause: MappingCause, description: str, m: Mitigation, trace: tuple[TraceFrame, ...], location: SourceLocation | None = None) -> None:
        self.sink.emit(
            Diagnostic(
                category=CATEGORY_BY_CAUSE[cause],
                description=description,
                trace=trace or (TraceFrame("ingest", self.surface.metadata.get("source", "<surface>")),),
                location=location or self._location(),
                resolution_strategy=m.strategy,
                cause=cause,
                skipped=m.skipped,
            )
        )

    def issue(self, cause: MappingCause, subject: str, detail: str) -> MappingIssue:
        return MappingIssue(cause, subject, detail, self._trace())

    # -- reachability & conflicts -------------------------------------------

    def reachable(self, t: SourceType, seen: set[str]) -> None:
        if isinstance(t, Named):
            for a in t.args:
                self.reachable(a, seen)
            if t.name in seen or self.config.custom_scalar(t.name):
                return
            decl = self.decls.get(t.name)
            if decl is None:
                return
            seen.add(t.name)
            for f in decl.fields:
                if f.transient:
                    continue
                if f.link is not None:
                    target = self._link_target(f.link.operation)
                    if target is not None:
                        self.reachable(self._safe_unwrap(target[1].returns), seen)
                    continue
                self.reachable(f.type, seen)
            for m in decl.operations:
                self.reachable(m.type, seen)
            for iface in decl.implements:
                self.reachable(Named(iface), seen)
            if decl.kind == "interface":
                for other, d in self.decls.items():
                    if t.name in d.implements:
                        self.reachable(Named(other), seen)
        elif isinstance(t, ListOf):
            self.reachable(t.component, seen)
        elif isinstance(t, MapOf):
            self.reachable(t.key, seen)
            self.reachable(t.value, seen)
        elif isinstance(t, NullableMarker):
            self.reachable(t.inner, seen)

    def _safe_unwrap(self, t: SourceType) -> SourceType:
        try:
            return unwrap_wrapper(t, self.config)
        except MappingIssue:
            return t

    def op_reach(self, ctx: _OpCtx) -> list[str]:
        seen: set[str] = set()
        for p in ctx.op.params:
            self.reachable(p.type, seen)
        self.reachable(self._safe_unwrap(ctx.op.returns), seen)
        # the type parameters of generic declarations are not types
        return sorted(q for q in seen if q in self.decls)

    def base_name(self, qname: str) -> str:
        return normalize_name(simple_name(qname))

    def reserved(self) -> set[str]:
        out = set(ROOT_NAMES) | set(BUILTIN_SCALARS) | set(EXTENDED_SCALARS) | {UNMAPPED_SCALAR}
        out |= {s for _, s in self.config.custom_scalar_map}
        return out

    def _qualified_name(self, qname: str, taken: set[str]) -> str:
        name = normalize_name(qname)
        n = 2
        candidate = name
        while candidate in taken:
            candidate = f"{name}{n}"
            n += 1
        return candidate

    def resolve_conflicts(self, ops: list[_OpCtx]) -> list[_OpCtx]:
        reach = {id(c): self.op_reach(c) for c in ops}
        reserved = self.reserved()
        for name in sorted(reserved):
            self.names[name] = ("reserved", name)
        op_names: dict[int, str] = {}

        if self.config.strict:
            accepted: list[_OpCtx] = []
            types: dict[str, str] = {}
            roots: set[tuple[RwsDef, str]] = set()
            for c in ops:
                problem = None
                local: dict[str, str] = {}
                for q in reach[id(c)]:
                    try:
                        base = self.base_name(q)
                    except NamingError:
                        continue  # reported during mapping
                    other = types.get(base, local.get(base))
                    if base in reserved:
                        problem = (q, f"type {q} clashes with the reserved name {base}", self._qualified_name(q, reserved))
                    elif other is not None and other != q:
                        problem = (q, f"type {q} clashes with {other} (both named {base})", normalize_name(q))
                    if problem:
                        break
                    local[base] = q
                try:
                    op_name = normalize_name(c.op.name)
                except NamingError:
                    op_name = c.op.name
                if problem is None and (c.rws, op_name) in roots:
                    alt = overload_name(op_name, [p.type for p in c.op.params], self._safe_unwrap(c.op.returns))
                    problem = (c.sid, f"operation {op_name} is already defined on the {c.rws.value} root", alt)
                if problem is not None:
                    subject, detail, alt = problem
                    self.current = c
                    m = mitigate(subject, MappingCause.CONFLICT, STRICT, rename_to=alt)
                    self._skip(c, MappingCause.CONFLICT, detail, m, (TraceFrame("ingest", c.sid), TraceFrame("conflicts", subject)))
                    self.current = None
                    continue
                types.update(local)
                roots.add((c.rws, op_name))
                c.op_name = op_name
                accepted.append(c)
            for base, q in types.items():
                self.type_names[q] = base
                self.names[base] = ("type", q)
            return accepted

        # non-strict: every member of a conflict group is renamed
        candidates = []
        all_types: set[str] = set()
        for c in ops:
            all_types.update(reach[id(c)])
        for q in sorted(all_types):
            try:
                candidates.append(Candidate("type", q, self.base_name(q)))
            except NamingError:
                pass
        for c in ops:
            try:
                name = normalize_name(c.op.name)
            except NamingError:
                name = "_" + (_camel(c.op.name) or "operation")
            op_names[id(c)] = name
            candidates.append(Candidate("operation", c.sid, name, root=c.rws.value))
        for q in sorted(all_types):
            try:
                self.type_names[q] = self.base_name(q)
            except NamingError:
                pass

        groups = detect_conflicts(candidates, reserved)
        renamed: list[tuple[str, str, str, str]] = []
        taken = set(reserved) | {c.name for c in candidates if c.kind == "type"}
        for g in groups:
            if g.kind in ("type", "reserved"):
                for member in g.members:
                    assigned = self._qualified_name(member.qualified, taken)
                    taken.add(assigned)
                    self.type_names[member.qualified] = assigned
                    renamed.append(("type", member.qualified, assigned, g.name))
        # source ids need not be unique (same signature on two paths), so
        # group members are matched back to their operations in order
        by_sid: dict[tuple[str, str], list[_OpCtx]] = {}
        for c in ops:
            by_sid.setdefault((c.sid, c.rws.value), []).append(c)
        used: set[str] = set()  # shared by all groups: the rename log stays injective
        for g in groups:
            if g.kind != "overload":
                continue
            proposals = []
            pending = {sid: iter(cs) for sid, cs in by_sid.items()}
            for member in g.members:
                c = next(pending[(member.qualified, member.root)])
                proposals.append((c, overload_name(member.name, [p.type for p in c.op.params], self._safe_unwrap(c.op.returns))))
            counts: dict[str, int] = {}
            for _, n in proposals:
                counts[n] = counts.get(n, 0) + 1
            for c, n in proposals:
                if counts[n] > 1:
                    n = normalize_name(c.service.namespace) + "_" + n
                base, k = n, 2
                while n in used:
                    n, k = f"{base}{k}", k + 1
                used.add(n)
                op_names[id(c)] = n
                renamed.append(("operation", c.sid, n, g.name))

        for q, name in self.type_names.items():
            self.names[name] = ("type", q)
        for kind, original, assigned, wanted in renamed:
            ctx = next((c for c in ops if c.sid == original), None)
            if ctx is None:
                ctx = next((c for c in ops if original in reach[id(c)]), None)
            self.current = ctx
            self._record_rename(kind, original, assigned, wanted)
            self.current = None
        for c in ops:
            c.op_name = op_names[id(c)]
        return ops

    def _skip(self, c: _OpCtx, cause: MappingCause, detail: str, m: Mitigation, trace: tuple[TraceFrame, ...]) -> None:
        self._emit(cause, f"skipped {c.sid}: {detail}", m, trace, c.op.location)

    # -- type mapping --------------------------------------------------------

    def child(self, t: SourceType, depth: int, subject: str) -> TypeDef:
        """Map a nested type; in non-strict mode problems are repaired here."""
        try:
            return self.map_type(t, depth + 1)
        except MappingIssue as exc:
            if self.config.strict:
                raise
            return self.substitute_unmapped(exc, subject)

    def substitute_unmapped(self, exc: MappingIssue, subject: str) -> TypeDef:
        m = mitigate(exc.subject, exc.cause, self.config.mode)
        self.model.synthesis_log.append(SynthesisRecord(subject, exc.cause.value, m.strategy))
        self._emit(exc.cause, f"{subject}: {exc.detail}", m, exc.trace or self._trace())
        self.model.types.setdefault(UNMAPPED_SCALAR, LiteralDef(ScalarKind(UNMAPPED_SCALAR, "custom")))
        return LiteralDef(ScalarKind(UNMAPPED_SCALAR, "custom"))

    def map_type(self, t: SourceType, depth: int = 0) -> TypeDef:
        if depth >= self.config.recursion_depth_limit:
            raise self.issue(MappingCause.INVALID, source_type_label(t), f"nesting deeper than {self.config.recursion_depth_limit}")
        if isinstance(t, Primitive):
            scalar = scalar_for(t)
            if scalar is None:
                raise self.issue(MappingCause.UNKNOWN, source_type_label(t), "no scalar preserves this primitive's precision")
            return LiteralDef(ScalarKind.of(scalar))
        if isinstance(t, Void):
            return VoidDef()
        if isinstance(t, Opaque):
            raise self.issue(MappingCause.UNKNOWN, f"opaque<{t.reason}>", f"construct '{t.reason}' has no GraphQL equivalent")
        if isinstance(t, NullableMarker):
            inner = self.map_type(t.inner, depth + 1)
            return non_null(inner) if t.required else nullable(inner)
        if isinstance(t, ListOf):
            component = self.child(t.component, depth, "list component")
            if isinstance(component, VoidDef):
                raise self.issue(MappingCause.INVALID, source_type_label(t), "list of void")
            return ListDef(component)
        if isinstance(t, MapOf):
            return self.map_map(t, depth)
        if isinstance(t, Named):
            return self.map_named(t, depth)
        raise TypeError(t)

    def map_map(self, t: MapOf, depth: int) -> TypeDef:
        key_t = t.key
        while isinstance(key_t, NullableMarker):
            key_t = key_t.inner
        if isinstance(key_t, Named):
            decl = self.decls.get(key_t.name)
            if (decl is None or decl.kind != "enum") and not self.config.custom_scalar(key_t.name):
                raise self.issue(MappingCause.INVALID, source_type_label(t), f"map key {key_t.name} is not a scalar or enum")
        elif not isinstance(key_t, Primitive):
            raise self.issue(MappingCause.INVALID, source_type_label(t), "map key is not a scalar or enum")
        key = self.map_type(t.key, depth + 1)
        value = self.child(t.value, depth, "map value")
        if isinstance(value, VoidDef):
            raise self.issue(MappingCause.INVALID, source_type_label(t), "map of void values")
        wanted = canonical_name((key, value))
        entry_key = ("entry", key, value)
        name = self.memo.get(entry_key)
        if name is None:
            name = self.claim(wanted, entry_key, f"map<{type_label(key)},{type_label(value)}>")
            self.memo[entry_key] = name
            self.model.types[name] = MapEntryDef(key, value, name)
        return ListDef(MapEntryDef(key, value, name))

    def map_named(self, t: Named, depth: int) -> TypeDef:
        scalar = self.config.custom_scalar(t.name)
        if scalar:
            if t.args:
                raise self.issue(MappingCause.INVALID, t.name, "custom scalar used with type arguments")
            lit = LiteralDef(ScalarKind(scalar, "custom"))
            self.model.types.setdefault(scalar, lit)
            return lit
        decl = self.decls.get(t.name)
        if decl is None:
            raise self.issue(MappingCause.MISSING, t.name, f"no declaration for type {t.name}")
        if decl.type_params or t.args:
            if len(t.args) != len(decl.type_params):
                raise self.issue(
                    MappingCause.INVALID,
                    source_type_label(t),
                    f"{t.name} takes {len(decl.type_params)} type arguments, got {len(t.args)}",
                )
            return self.monomorphize(t.name, decl, t.args, depth)
        key = ("type", t.name)
        if key in self.memo:
            return TypeRef(self.memo[key])
        name = self.type_names.get(t.name)
        if name is None:
            try:
                name = normalize_name(simple_name(t.name))
            except NamingError as exc:
                raise self.issue(MappingCause.INVALID, t.name, str(exc)) from None
            name = self.claim(name, key, t.name)
            self.type_names[t.name] = name
        self.memo[key] = name
        self.trace.append(TraceFrame("map_type", t.name))
        try:
            self.model.types[name] = self.build_decl(name, t.name, decl, {}, depth, ())
        finally:
            self.trace.pop()
        if decl.kind == "interface":
            self.map_implementors(t.name, depth)
        return TypeRef(name)

    def map_implementors(self, iface: str, depth: int) -> None:
        for other, d in self.decls.items():
            if iface in d.implements and not d.type_params:
                self.child(Named(other), depth, f"implementor {other}")

    def monomorphize(self, qname: str, decl: TypeDecl, args: tuple[SourceType, ...], depth: int) -> TypeDef:
        if len(args) != len(decl.type_params):
            raise self.issue(MappingCause.INVALID, qname, f"expected {len(decl.type_params)} type arguments, got {len(args)}")
        mapped = []
        for a in args:
            m = self.child(a, depth, f"type argument of {qname}")
            if isinstance(m, VoidDef) and decl.kind != "object":
                raise self.issue(MappingCause.INVALID, qname, "void type argument")
            mapped.append(m)
        mapped_args = tuple(mapped)
        key = ("inst", qname, mapped_args)
        if key in self.memo:
            return TypeRef(self.memo[key])
        base = self.type_names.get(qname)
        if base is None:
            try:
                base = normalize_name(simple_name(qname))
            except NamingError as exc:
                raise self.issue(MappingCause.INVALID, qname, str(exc)) from None
            self.type_names[qname] = base
        original = f"{qname}<{','.join(source_type_label(a) for a in args)}>"
        wanted = base + "Of" + "".join(type_label(a) for a in mapped_args)
        name = self.claim(wanted, key, original, "instantiation")
        self.memo[key] = name
        if name == wanted:
            self.model.rename_log.append(RenameRecord("instantiation", original, name))
        env = dict(zip(decl.type_params, args))
        self.trace.append(TraceFrame("monomorphize", original))
        try:
            self.model.types[name] = self.build_decl(name, qname, decl, env, depth, mapped_args)
        finally:
            self.trace.pop()
        return TypeRef(name)

    def build_decl(self, name: str, qname: str, decl: TypeDecl, env: Mapping[str, SourceType], depth: int, type_args: tuple[TypeDef, ...]) -> NamedDef:
        if decl.kind == "enum":
            bad = [v for v in decl.values if not NAME_RE.match(v) or v in ("true", "false", "null")]
            if bad or len(set(decl.values)) != len(decl.values) or not decl.values:
                detail = f"enum values {bad} are not GraphQL names" if bad else "empty or duplicate enum values"
                raise self.issue(MappingCause.INVALID, qname, detail)
            return EnumDef(name, decl.values, qname)
        if decl.kind == "interface":
            fields = []
            for m in decl.operations:
                if m.params:
                    exc = self.issue(MappingCause.UNKNOWN, f"{qname}.{m.name}", "interface method takes parameters")
                    if self.config.strict:
                        raise exc
                    mit = Mitigation("drop-params", f"expose {qname}.{m.name} as a field without parameters", False)
                    self.model.synthesis_log.append(SynthesisRecord(f"{qname}.{m.name}", exc.cause.value, mit.strategy))
                    self._emit(exc.cause, f"{qname}.{m.name}: {exc.detail}", mit, exc.trace)
                fields.append(self.build_field(qname, SourceField(m.name, m.type), env, depth))
            fields = self.dedupe_fields(qname, fields)
            if not fields:
                fields = [self.synthesize_empty(qname)]
            return InterfaceDef(name, tuple(fields), qname)
        fields = []
        for f in decl.fields:
            if f.transient:
                continue
            fields.append(self.build_field(qname, f, env, depth))
        fields = self.dedupe_fields(qname, fields)
        if not fields:
            fields = [self.synthesize_empty(qname)]
        interfaces = self.check_implements(qname, decl)
        return ObjectDef(name, qname, tuple(fields), type_args, interfaces)

    def synthesize_empty(self, qname: str) -> FieldDef:
        exc = self.issue(MappingCause.INVALID, qname, "type declares no fields")
        exc.field_less = True
        if self.config.strict:
            raise exc
        m = mitigate(qname, MappingCause.INVALID, self.config.mode, field_less=True)
        self.model.synthesis_log.append(SynthesisRecord(qname, MappingCause.INVALID.value, m.strategy))
        self._emit(MappingCause.INVALID, f"{qname}: {exc.detail}", m, exc.trace)
        return FieldDef(EMPTY_FIELD, LiteralDef(ScalarKind.of("Boolean")), EMPTY_FIELD)

    def dedupe_fields(self, owner: str, fields: list[FieldDef]) -> list[FieldDef]:
        seen: set[str] = set()
        out = []
        for f in fields:
            name = f.name
            if name in seen:
                if self.config.strict:
                    raise self.issue(MappingCause.CONFLICT, f"{owner}.{f.wire_name}", f"field name {name} is used twice")
                n = 2
                while f"{name}{n}" in seen:
                    n += 1
                name = f"{name}{n}"
                self._record_rename("field", f"{owner}.{f.wire_name}", f"{owner}.{name}", f.name)
                f = FieldDef(name, f.type, f.wire_name, f.link)
            seen.add(name)
            out.append(f)
        return out

    def build_field(self, qname: str, f: SourceField, env: Mapping[str, SourceType], depth: int) -> FieldDef:
        subject = f"{qname}.{f.name}"
        try:
            fname = normalize_name(f.name)
        except NamingError as exc:
            raise self.issue(MappingCause.INVALID, subject, str(exc)) from None
        if f.link is not None:
            return self.build_link(qname, f, fname, depth)
        t = self.child(substitute(f.type, env), depth, subject)
        if f.required:
            t = non_null(t)
        return FieldDef(fname, t, f.name)

    def _link_target(self, operation: str) -> tuple[Service, SourceOperation] | None:
        hits = [(s, o) for s, o in self.surface.iter_operations() if o.name == operation]
        return hits[0] if len(hits) == 1 else None

    def build_link(self, qname: str, f: SourceField, fname: str, depth: int) -> FieldDef:
        subject = f"{qname}.{f.name}"
        target = self._link_target(f.link.operation)
        decl_fields = {x.name for x in self.decls[qname].fields} if qname in self.decls else set()
        try:
            if target is None:
                raise self.issue(MappingCause.MISSING, subject, f"link target operation {f.link.operation!r} not found (or ambiguous)")
            svc, op = target
            if op.http_method != "GET":
                raise self.issue(MappingCause.INVALID, subject, "link target must be a read operation")
            by_name = {p.name: p for p in op.params}
            args = dict(f.link.args)
            missing = [p.name for p in op.params if p.required and p.name not in args]
            unknown = [a for a in args if a not in by_name] + [v for v in args.values() if v not in decl_fields]
            if missing or unknown:
                raise self.issue(MappingCause.INVALID, subject, f"link arguments do not match (missing {missing}, unknown {unknown})")
            records: list[WrapperRecord] = []
            returns = unwrap_wrapper(op.returns, self.config, records, source_id(svc.namespace, op))
        except MappingIssue as exc:
            if self.config.strict:
                raise
            return FieldDef(fname, self.substitute_unmapped(exc, subject), f.name)
        t = self.child(returns, depth, subject)
        link = FieldLink(
            operation=source_id(svc.namespace, op),
            args=tuple(sorted(args.items())),
            http_method=op.http_method,
            path=op.path,
            params=tuple((by_name[a].name, by_name[a].location, parent) for a, parent in sorted(args.items())),
            extract=tuple(r.payload_field for r in records),
        )
        return FieldDef(fname, t, "", link)

    def check_implements(self, qname: str, decl: TypeDecl) -> tuple[str, ...]:
        out = []
        fields = {f.name: f for f in decl.fields if not f.transient}
        for iface in decl.implements:
            idecl = self.decls.get(iface)
            problem = None
            if idecl is None:
                problem = (MappingCause.MISSING, f"interface {iface} is not declared")
            elif idecl.kind != "interface":
                problem = (MappingCause.INVALID, f"{iface} is not an interface")
            else:
                for m in idecl.operations:
                    f = fields.get(m.name)
                    if f is None or f.type != m.type or f.link is not None:
                        problem = (MappingCause.INVALID, f"{qname} does not provide {iface}.{m.name} with the same type")
                        break
            if problem is not None:
                exc = self.issue(problem[0], f"{qname} implements {iface}", problem[1])
                if self.config.strict:
                    raise exc
                mit = Mitigation("drop-relation", f"drop the claim that {qname} implements {iface}", False)
                self.model.synthesis_log.append(SynthesisRecord(f"{qname} implements {iface}", exc.cause.value, mit.strategy))
                self._emit(exc.cause, exc.detail, mit, exc.trace)
                continue
            ref = self.map_type(Named(iface))
            out.append(ref.name)
        return tuple(out)

    # -- operations ----------------------------------------------------------

    def input_problem(self, t: TypeDef, seen: set[str] | None = None) -> str | None:
        seen = set() if seen is None else seen
        if isinstance(t, (NonNullDef,)):
            return self.input_problem(t.inner, seen)
        if isinstance(t, ListDef):
            return self.input_problem(t.component, seen)
        if isinstance(t, MapEntryDef):
            return self.input_problem(t.key, seen) or self.input_problem(t.value, seen)
        if isinstance(t, VoidDef):
            return "void in input position"
        if isinstance(t, TypeRef):
            if t.name in seen:
                return None
            seen.add(t.name)
            target = self.model.types.get(t.name)
            if isinstance(target, InterfaceDef):
                return f"interface {t.name} in input position"
            if isinstance(target, ObjectDef):
                for f in target.fields:
                    if f.link is None:
                        problem = self.input_problem(f.type, seen)
                        if problem:
                            return problem
        return None

    def operation_name(self, c: _OpCtx) -> str:
        try:
            return normalize_name(c.op_name or c.op.name)
        except NamingError as exc:
            raise self.issue(MappingCause.INVALID, c.sid, str(exc)) from None

    def map_operation(self, c: _OpCtx) -> OperationDef:
        params = []
        seen: set[str] = set()
        for p in c.op.params:
            subject = f"{c.sid} parameter {p.name}"
            try:
                pname = normalize_name(p.name)
            except NamingError as exc:
                raise self.issue(MappingCause.INVALID, subject, str(exc)) from None
            if pname in seen:
                if self.config.strict:
                    raise self.issue(MappingCause.CONFLICT, subject, f"argument name {pname} is used twice")
                n = 2
                while f"{pname}{n}" in seen:
                    n += 1
                self._record_rename("argument", f"{c.sid}:{p.name}", f"{c.sid}:{pname}{n}", pname)
                pname = f"{pname}{n}"
            seen.add(pname)
            t = self.child(p.type, 0, subject)
            problem = self.input_problem(t)
            if problem:
                exc = self.issue(MappingCause.INVALID, subject, problem)
                if self.config.strict:
                    raise exc
                t = self.substitute_unmapped(exc, subject)
            if p.required or p.location == "path":
                t = non_null(t)
            params.append(ParamDef(pname, t, p.name, p.location))
        records: list[WrapperRecord] = []
        try:
            returns = unwrap_wrapper(c.op.returns, self.config, records, c.sid)
        except MappingIssue as exc:
            if self.config.strict:
                raise MappingIssue(exc.cause, exc.subject, exc.detail, self._trace()) from None
            output = self.substitute_unmapped(MappingIssue(exc.cause, exc.subject, exc.detail, self._trace()), f"{c.sid} result")
        else:
            output = self.child(returns, 0, f"{c.sid} result")
        self.model.wrapper_log.extend(records)
        return OperationDef(
            name=self.operation_name(c),
            source_id=c.sid,
            params=tuple(params),
            output=output,
            rws=c.rws,
            http_method=c.op.http_method,
            path=c.op.path,
        )

    def snapshot(self) -> tuple:
        m = self.model
        return (dict(self.names), dict(self.type_names), dict(self.memo), dict(m.types), len(m.rename_log), len(m.wrapper_log))

    def restore(self, snap: tuple) -> None:
        names, type_names, memo, types, n_rename, n_wrap = snap
        self.names, self.type_names, self.memo = names, type_names, memo
        self.model.types = types
        del self.model.rename_log[n_rename:]
        del self.model.wrapper_log[n_wrap:]

    def run(self) -> ProcessResult:
        ops = [
            _OpCtx(svc, op, source_id(svc.namespace, op), classify_operation(op.http_method))
            for svc, op in self.surface.iter_operations()
        ]
        ops = self.resolve_conflicts(ops)
        for c in ops:
            self.current = c
            self.trace = []
            snap = self.snapshot()
            try:
                self.model.operations.append(self.map_operation(c))
            except MappingIssue as exc:
                if not self.config.strict:
                    raise
                self.restore(snap)
                m = mitigate(exc.subject, exc.cause, STRICT, field_less=exc.field_less)
                self._skip(c, exc.cause, f"{exc.subject}: {exc.detail}", m, exc.trace or self._trace())
            self.current = None
        return ProcessResult(self.model, list(self.sink.records))


def process(surface: ApiSurface, config: ProcessorConfig | None = None) -> ProcessResult:
    """Map every operation of ``surface`` into a definition model."""
    return _Processor(surface, config or ProcessorConfig()).run()


def map_type(t: SourceType, decls: Mapping[str, TypeDecl] | None = None, config: ProcessorConfig | None = None, depth: int = 0) -> TypeDef:
    """Map one source type in isolation (named types land in a throwaway pool)."""
    proc = _Processor(ApiSurface(type_decls=dict(decls or {})), config or ProcessorConfig(mode=STRICT))
    for name in proc.reserved():
        proc.names[name] = ("reserved", name)
    return proc.map_type(t, depth)


def map_type_in(t: SourceType, decls: Mapping[str, TypeDecl] | None = None, config: ProcessorConfig | None = None) -> tuple[TypeDef, DefModel]:
    """Like :func:`map_type`, also returning the model holding the named types."""
    proc = _Processor(ApiSurface(type_decls=dict(decls or {})), config or ProcessorConfig(mode=STRICT))
    for name in proc.reserved():
        proc.names[name] = ("reserved", name)
    return proc.map_type(t), proc.model


def monomorphize(base: str, args: Iterable[SourceType], decls: Mapping[str, TypeDecl], config: ProcessorConfig | None = None) -> tuple[ObjectDef, DefModel]:
    proc = _Processor(ApiSurface(type_decls=dict(decls)), config or ProcessorConfig(mode=STRICT))
    ref = proc.monomorphize(base, decls[base], tuple(args), 0)
    return proc.model.types[ref.name], proc.model
