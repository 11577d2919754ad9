"""Tokenizer for ``.eflint`` source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

KEYWORDS = frozenset("""
Fact Act Event Duty Var Function Bool Physical Open Closed Extend Domain
Identified by Related to Actor Recipient Holder Claimant Holds when Derived
from Conditioned Creates Terminates Obfuscates Violated Syncs with When Where
Foreach Forall Exists Count Sum Max Min Not Enabled True False Int String
""".split())

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*'*")
INT_RE = re.compile(r"[0-9]+")
OPERATORS = ("==", "!=", "<=", ">=", "&&", "||", "?-", "<", ">", "+", "-", "*", "/",
             "=", "?", "(", ")", "{", "}", ",", ":")


@dataclass(frozen=True)
class Location:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | string | int | op | proj | stop | range | directive | eof
    text: str
    location: Location

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.location})"


def tokenize(source: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(source)
    line, line_start = 1, 0

    def loc(pos: int) -> Location:
        return Location(filename, line, pos - line_start + 1)

    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            line_start = i + 1
            i += 1
            continue
        if c in " \t\r\f\v﻿":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j
            continue
        start = i
        if c == "#":
            m = re.compile(r"#(include|require)\b").match(source, i)
            if not m:
                raise ParseError("unknown directive", loc(i), frozenset({"#include", "#require"}))
            tokens.append(Token("directive", m.group(1), loc(i)))
            i = m.end()
            continue
        if c == '"':
            j = i + 1
            buf = []
            while j < n and source[j] != '"':
                if source[j] == "\\" and j + 1 < n:
                    buf.append(source[j + 1])
                    j += 2
                    continue
                if source[j] == "\n":
                    break
                buf.append(source[j])
                j += 1
            if j >= n or source[j] != '"':
                raise ParseError("unterminated string literal", loc(i))
            tokens.append(Token("string", "".join(buf), loc(i)))
            i = j + 1
            continue
        if c == "[":
            j = source.find("]", i)
            if j < 0 or "\n" in source[i:j]:
                raise ParseError("unterminated bracketed identifier", loc(i))
            tokens.append(Token("ident", source[i:j + 1], loc(i)))
            i = j + 1
            continue
        if c.isdigit():
            m = INT_RE.match(source, i)
            tokens.append(Token("int", m.group(), loc(i)))
            i = m.end()
            continue
        if c.isalpha() or c == "_":
            m = IDENT_RE.match(source, i)
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, loc(i)))
            i = m.end()
            continue
        if c == ".":
            if source.startswith("..", i):
                tokens.append(Token("range", "..", loc(i)))
                i += 2
                continue
            nxt = source[i + 1] if i + 1 < n else ""
            prev = source[i - 1] if i > 0 else " "
            if nxt and (nxt.isalpha() or nxt in "_[") and not prev.isspace() and tokens \
                    and tokens[-1].kind in ("ident", "op") and (tokens[-1].kind == "ident" or tokens[-1].text == ")"):
                tokens.append(Token("proj", ".", loc(i)))
            else:
                tokens.append(Token("stop", ".", loc(i)))
            i += 1
            continue
        for op in OPERATORS:
            if source.startswith(op, start):
                tokens.append(Token("op", op, loc(i)))
                i += len(op)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", loc(i))
    tokens.append(Token("eof", "", Location(filename, line, i - line_start + 1)))
    return tokens
