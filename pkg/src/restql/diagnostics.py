"""Failure-diagnosis records shared by the plugins and the processor."""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable

from .surface import SourceLocation


class MappingCause(str, enum.Enum):
    MISSING = "Missing"
    INVALID = "Invalid"
    UNKNOWN = "Unknown"
    CONFLICT = "Conflict"


# footer column order
CAUSE_ORDER = (MappingCause.CONFLICT, MappingCause.INVALID, MappingCause.UNKNOWN, MappingCause.MISSING)

CATEGORY_BY_CAUSE = {
    MappingCause.CONFLICT: "NameConflict",
    MappingCause.INVALID: "InvalidType",
    MappingCause.UNKNOWN: "UnknownType",
    MappingCause.MISSING: "MissingType",
}


class DiagnosticError(ValueError):
    pass


@dataclass(frozen=True)
class TraceFrame:
    stage: str  # ingest | map_type | monomorphize | conflicts | translate
    subject: str


@dataclass(frozen=True)
class Diagnostic:
    category: str
    description: str
    trace: tuple[TraceFrame, ...]
    location: SourceLocation
    resolution_strategy: str
    cause: MappingCause | None = None
    skipped: bool = False  # True when the operation was dropped (strict mode)

    def problems(self) -> list[str]:
        out = []
        for name in ("category", "description", "resolution_strategy"):
            if not str(getattr(self, name)).strip():
                out.append(f"empty {name}")
        if not self.trace:
            out.append("empty trace")
        if not self.location.file:
            out.append("empty location")
        return out

    def to_data(self) -> dict[str, Any]:
        loc: dict[str, Any] = {"file": self.location.file}
        if self.location.line is not None:
            loc["line"] = self.location.line
        return {
            "category": self.category,
            "description": self.description,
            "trace": [{"stage": f.stage, "subject": f.subject} for f in self.trace],
            "location": loc,
            "resolutionStrategy": self.resolution_strategy,
            "cause": self.cause.value if self.cause else None,
            "action": "skipped" if self.skipped else "mitigated",
        }


@dataclass
class DiagnosticSink:
    """Append-only record list; appends are serialized by a lock."""

    records: list[Diagnostic] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def emit(self, d: Diagnostic) -> Diagnostic:
        problems = d.problems()
        if problems:
            raise DiagnosticError(f"malformed diagnostic ({', '.join(problems)}): {d!r}")
        with self._lock:
            self.records.append(d)
        return d

    def __iter__(self):
        return iter(list(self.records))

    def __len__(self) -> int:
        return len(self.records)


def emit(d: Diagnostic, sink: DiagnosticSink) -> Diagnostic:
    return sink.emit(d)


def _sort_key(d: Diagnostic) -> tuple:
    return (d.location.file, d.location.line if d.location.line is not None else -1, d.category)


def _loc_text(loc: SourceLocation) -> str:
    return loc.file if loc.line is None else f"{loc.file}:{loc.line}"


def count_by_cause(diagnostics: Iterable[Diagnostic]) -> dict[MappingCause, int]:
    counts = {c: 0 for c in CAUSE_ORDER}
    for d in diagnostics:
        if d.cause is not None:
            counts[d.cause] += 1
    return counts


def report(diagnostics: Iterable[Diagnostic], format: str = "text") -> str:
    ordered = sorted(diagnostics, key=_sort_key)
    if format == "json":
        return json.dumps([d.to_data() for d in ordered], indent=2) + "\n"
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")

    rows = [
        (_loc_text(d.location), d.category, d.cause.value if d.cause else "-", "skipped" if d.skipped else "mitigated", d.description)
        for d in ordered
    ]
    lines = []
    if rows:
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        for r in rows:
            cells = [r[i].ljust(widths[i]) for i in range(4)]
            lines.append("  ".join(cells) + "  " + r[4])
        lines.append("")
    counts = count_by_cause(ordered)
    noun = "diagnostic" if len(rows) == 1 else "diagnostics"
    lines.append(f"{len(rows)} {noun}")
    lines.append(", ".join(f"{c.value}: {counts[c]}" for c in CAUSE_ORDER))
    return "\n".join(lines) + "\n"
