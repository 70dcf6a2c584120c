"""Native API-IR JSON plugin (``*.apiir.json``)."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from ..surface import (
    ApiSurface,
    ListOf,
    MapOf,
    Named,
    NullableMarker,
    Opaque,
    SourceType,
    Void,
    path_placeholders,
    serialize_surface,
    surface_from_data,
)
from . import IngestionError


@lru_cache(maxsize=1)
def apiir_schema() -> dict[str, Any]:
    text = resources.files(__package__).joinpath("apiir-schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _check_key(t: SourceType, where: str) -> None:
    inner = t
    while isinstance(inner, NullableMarker):
        inner = inner.inner
    if isinstance(inner, (ListOf, MapOf, Void, Opaque)):
        raise IngestionError(f"map key must be a primitive or enum type, got {type(inner).__name__}", where)


def _walk_keys(t: SourceType, where: str) -> None:
    if isinstance(t, MapOf):
        _check_key(t.key, where)
        _walk_keys(t.key, where)
        _walk_keys(t.value, where)
    elif isinstance(t, ListOf):
        _walk_keys(t.component, where)
    elif isinstance(t, NullableMarker):
        _walk_keys(t.inner, where)
    elif isinstance(t, Named):
        for a in t.args:
            _walk_keys(a, where)


def check_surface(surface: ApiSurface, locator: str = "") -> None:
    """Raise IngestionError for the first ApiSurface invariant that fails."""
    for svc in surface.services:
        for op in svc.operations:
            ident = f"{locator}{'#' if locator else ''}{svc.namespace}.{op.name}"
            bodies = [p for p in op.params if p.location == "body"]
            if len(bodies) > 1:
                raise IngestionError(f"operation has {len(bodies)} body parameters (at most one allowed)", ident)
            placeholders = path_placeholders(op.path)
            for p in op.params:
                if p.location == "path" and p.name not in placeholders:
                    raise IngestionError(f"path parameter {p.name!r} does not appear in {op.path!r}", ident)
                _walk_keys(p.type, ident)
            names = [p.name for p in op.params]
            if len(set(names)) != len(names):
                raise IngestionError("duplicate parameter names", ident)
            _walk_keys(op.returns, ident)
    for name, decl in surface.type_decls.items():
        for f in decl.fields:
            _walk_keys(f.type, f"{locator}#{name}.{f.name}" if locator else f"{name}.{f.name}")
        for m in decl.operations:
            _walk_keys(m.type, name)


def load_apiir(document: str, locator: str = "<memory>") -> ApiSurface:
    """Parse and validate an API-IR document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise IngestionError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", locator) from exc
    if isinstance(data, dict) and "apiirVersion" not in data:
        raise IngestionError("missing mandatory 'apiirVersion' (unversioned documents are rejected)", locator)

    validator = jsonschema.Draft202012Validator(apiir_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise IngestionError(f"malformed document at {_json_path(err.absolute_path)}: {err.message}", locator)

    surface = surface_from_data(data)
    check_surface(surface, locator)
    return surface


class ApiIrPlugin:
    name = "apiir"

    def loads(self, text: str, locator: str = "<memory>") -> ApiSurface:
        return load_apiir(text, locator)

    def load(self, path: str | Path) -> ApiSurface:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IngestionError(str(exc), str(path)) from exc
        return load_apiir(text, path.name)

    @staticmethod
    def dumps(surface: ApiSurface) -> str:
        return serialize_surface(surface)
