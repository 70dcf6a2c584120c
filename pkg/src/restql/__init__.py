"""REST-to-GraphQL conversion: plugins, definition model, schema, bindings and gateway."""

from __future__ import annotations

from .pipeline import PipelineResult, convert, load_surface, run_pipeline
from .processor import ProcessorConfig, process
from .schema_validation import validate_schema
from .sdl import parse_sdl, print_sdl
from .translator import translate

__version__ = "0.1.0"

__all__ = [
    "PipelineResult",
    "ProcessorConfig",
    "convert",
    "load_surface",
    "parse_sdl",
    "print_sdl",
    "process",
    "run_pipeline",
    "translate",
    "validate_schema",
]
