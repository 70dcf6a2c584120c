"""End-to-end conversion: input document -> model -> schema -> bindings."""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .defmodel import DefModel, Violation, validate_defmodel
from .diagnostics import Diagnostic
from .generator import BindingManifest, generate_bindings
from .plugins import PluginRegistry, default_registry
from .processor import ProcessorConfig, process
from .schema import SchemaDoc
from .schema_validation import validate_schema
from .sdl import print_sdl
from .surface import ApiSurface
from .translator import translate


@dataclass
class PipelineResult:
    surface: ApiSurface
    model: DefModel
    diagnostics: list[Diagnostic]
    schema: SchemaDoc
    sdl: str
    manifest: BindingManifest
    schema_violations: list[Violation]
    model_violations: list[Violation]

    @property
    def skipped(self) -> int:
        return sum(1 for d in self.diagnostics if d.skipped)


def plugin_for(path: str | Path) -> str:
    """Guess the plugin from a file name."""
    name = str(path).lower()
    return "apiir" if name.endswith(".apiir.json") else "openapi"


def load_surface(path: str | Path, plugin: str | None = None, registry: PluginRegistry | None = None) -> ApiSurface:
    registry = registry or default_registry()
    return registry.get(plugin or plugin_for(path)).load(path)


def run_pipeline(surface: ApiSurface, config: ProcessorConfig | None = None) -> PipelineResult:
    result = process(surface, config)
    model_violations = validate_defmodel(result.model)
    schema = translate(result.model)
    return PipelineResult(
        surface=surface,
        model=result.model,
        diagnostics=result.diagnostics,
        schema=schema,
        sdl=print_sdl(schema),
        manifest=generate_bindings(result.model, schema),
        schema_violations=validate_schema(schema),
        model_violations=model_violations,
    )


def convert(path: str | Path, plugin: str | None = None, config: ProcessorConfig | None = None) -> PipelineResult:
    return run_pipeline(load_surface(path, plugin), config)


# -- bundled corpus ----------------------------------------------------------


def corpus_dir() -> Path:
    return Path(str(resources.files("restql").joinpath("corpus")))


def corpus_files() -> list[Path]:
    """Every bundled API description (API-IR and OpenAPI)."""
    d = corpus_dir()
    return sorted(p for p in d.iterdir() if p.name.endswith((".apiir.json", ".openapi.yaml", ".openapi.json")))


def corpus_config(mode: str | None = None) -> ProcessorConfig:
    config = ProcessorConfig.load(corpus_dir() / "restql.toml")
    return replace(config, mode=mode) if mode else config
