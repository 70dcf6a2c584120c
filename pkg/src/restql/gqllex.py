"""Tokenizer shared by the SDL reader and the request parser."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

PUNCTUATORS = set("!$()[]{}:=@|&")


class GraphQLSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"syntax error at line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # punct | name | int | float | string | spread | eof
    value: str
    line: int
    column: int


_NAME = re.compile(r"[_A-Za-z][_0-9A-Za-z]*")
_NUMBER = re.compile(r"-?(0|[1-9][0-9]*)(\.[0-9]+)?([eE][+-]?[0-9]+)?")


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, line, line_start = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = i - line_start + 1
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif ch in " \t\r,﻿":
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in PUNCTUATORS:
            out.append(Token("punct", ch, line, col))
            i += 1
        elif text.startswith("...", i):
            out.append(Token("spread", "...", line, col))
            i += 3
        elif ch == '"':
            if text.startswith('"""', i):
                end = text.find('"""', i + 3)
                if end < 0:
                    raise GraphQLSyntaxError("unterminated block string", line, col)
                raw = text[i + 3 : end]
                out.append(Token("string", raw, line, col))
                line += raw.count("\n")
                if "\n" in raw:
                    line_start = i + 3 + raw.rindex("\n") + 1
                i = end + 3
                continue
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                if j < n and text[j] == "\n":
                    break
                j += 1
            if j >= n or text[j] != '"':
                raise GraphQLSyntaxError("unterminated string", line, col)
            try:
                value = json.loads(text[i : j + 1])
            except json.JSONDecodeError:
                raise GraphQLSyntaxError("invalid escape in string", line, col) from None
            out.append(Token("string", value, line, col))
            i = j + 1
        elif ch == "-" or ch.isdigit():
            m = _NUMBER.match(text, i)
            if not m or (m.end() < n and (text[m.end()].isalnum() or text[m.end()] in "._")):
                raise GraphQLSyntaxError(f"invalid number starting with {ch!r}", line, col)
            kind = "float" if (m.group(2) or m.group(3)) else "int"
            out.append(Token(kind, m.group(0), line, col))
            i = m.end()
        elif ch.isalpha() or ch == "_":
            m = _NAME.match(text, i)
            out.append(Token("name", m.group(0), line, col))
            i = m.end()
        else:
            raise GraphQLSyntaxError(f"unexpected character {ch!r}", line, col)
    out.append(Token("eof", "", line, i - line_start + 1))
    return out


class TokenStream:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str, kind: str = "punct") -> bool:
        tok = self.peek
        return tok.kind == kind and tok.value == value

    def accept(self, value: str, kind: str = "punct") -> Token | None:
        if self.at(value, kind):
            return self.next()
        return None

    def expect(self, value: str, kind: str = "punct") -> Token:
        tok = self.peek
        if tok.kind != kind or tok.value != value:
            self.fail(f"expected {value!r}, found {describe(tok)}", tok)
        return self.next()

    def name(self) -> Token:
        tok = self.peek
        if tok.kind != "name":
            self.fail(f"expected a name, found {describe(tok)}", tok)
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek
        raise GraphQLSyntaxError(message, tok.line, tok.column)


def describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "string":
        return "string"
    return repr(tok.value)
