"""Embedded GraphQL request engine."""

from .backend import BackendError, BackendRequest, BackendResponse, FixtureBackend, HttpBackend
from .engine import execute
from .request import RequestDoc, Selection, UnsupportedConstruct, parse_request
from .server import Gateway, GatewayServer, serve
from .validation import validate_request

__all__ = [
    "BackendError",
    "BackendRequest",
    "BackendResponse",
    "FixtureBackend",
    "Gateway",
    "GatewayServer",
    "HttpBackend",
    "RequestDoc",
    "Selection",
    "UnsupportedConstruct",
    "execute",
    "parse_request",
    "serve",
    "validate_request",
]
