"""Plugin contract and registry.

A plugin turns one input document into an :class:`~restql.surface.ApiSurface`.
Plugins are stateless; a registry is filled once at start-up and only read
afterwards.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

from ..surface import ApiSurface


class IngestionError(Exception):
    """Input document could not be turned into an ApiSurface."""

    def __init__(self, message: str, locator: str = "") -> None:
        super().__init__(f"{locator}: {message}" if locator else message)
        self.locator = locator


class DuplicatePluginError(ValueError):
    pass


class Plugin(Protocol):
    name: str

    def loads(self, text: str, locator: str = "<memory>") -> ApiSurface: ...

    def load(self, path: str | Path) -> ApiSurface: ...


class PluginRegistry:
    def __init__(self) -> None:
        self._plugins: dict[str, Plugin] = {}

    def register(self, name: str, plugin: Plugin) -> Plugin:
        if name in self._plugins:
            raise DuplicatePluginError(f"plugin {name!r} is already registered")
        self._plugins[name] = plugin
        return plugin

    def get(self, name: str) -> Plugin:
        try:
            return self._plugins[name]
        except KeyError:
            raise KeyError(f"no plugin named {name!r}; available: {', '.join(self.names())}") from None

    def names(self) -> list[str]:
        return sorted(self._plugins)

    def __contains__(self, name: object) -> bool:
        return name in self._plugins


def register_plugin(registry: PluginRegistry, name: str, plugin: Plugin) -> PluginRegistry:
    registry.register(name, plugin)
    return registry


def default_registry() -> PluginRegistry:
    from .apiir import ApiIrPlugin
    from .openapi import OpenApiPlugin

    registry = PluginRegistry()
    registry.register("apiir", ApiIrPlugin())
    registry.register("openapi", OpenApiPlugin())
    return registry
