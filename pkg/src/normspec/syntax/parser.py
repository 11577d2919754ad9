"""Recursive-descent parser for phrases, declarations and expressions.

Operator precedence, loosest first::

    When/Where  <  ||  <  &&  <  comparisons  <  + -  <  * /  <  unary -, projection

Quantifier bodies extend as far to the right as possible.
"""

from __future__ import annotations

import os
from typing import Callable, Optional

from ..errors import IncludeCycleError, MissingFileError, ParseError
from . import ast as A
from .lexer import Token, tokenize

DECL_START = frozenset({"Fact", "Act", "Event", "Duty", "Var", "Function", "Bool",
                        "Physical", "Open", "Closed", "Extend"})
MODIFIERS = frozenset({"Var", "Function", "Bool", "Physical", "Open", "Closed", "Extend"})
KINDS = frozenset({"Fact", "Act", "Event", "Duty"})
ROLES = frozenset({"Actor", "Recipient", "Holder", "Claimant"})
QUANTIFIERS = frozenset({"Foreach", "Forall", "Exists"})
AGGREGATES = frozenset({"Count", "Sum", "Max", "Min"})
COMPARE = frozenset(A.COMPARE_OPS)

# clause keyword -> (second keyword or None, clause kind)
CLAUSE_START = {
    "Holds": ("when", "holds_when"),
    "Derived": ("from", "derived_from"),
    "Conditioned": ("by", "conditioned_by"),
    "Creates": (None, "creates"),
    "Terminates": (None, "terminates"),
    "Obfuscates": (None, "obfuscates"),
    "Violated": ("when", "violated_when"),
    "Syncs": ("with", "syncs_with"),
}

IncludeResolver = Callable[[str, Optional[str]], tuple[str, str]]


def is_atom_name(word: str) -> bool:
    """Bare identifiers starting with an upper-case letter denote string atoms."""
    return bool(word) and word[0].isupper()


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ----------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: Optional[str] = None, tok: Optional[Token] = None) -> bool:
        t = tok or self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_kw(self, *words: str) -> bool:
        return self.tok.kind == "keyword" and self.tok.text in words

    def at_op(self, *ops: str) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            self.error(f"unexpected {self.describe(self.tok)}", {text or kind})
        return self.advance()

    def error(self, message: str, expected=()):
        raise ParseError(message, self.tok.location, frozenset(expected))

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else f"{t.kind} {t.text!r}"

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.describe(self.tok)}", {"identifier"})
        return self.advance().text

    # -- fragments --------------------------------------------------------------

    def fragment_end(self, inside_braces: bool) -> None:
        if self.at("stop"):
            self.advance()
        elif self.at("eof") or (inside_braces and self.at_op("}")):
            return
        else:
            self.error(f"unexpected {self.describe(self.tok)}", {"."})

    def parse_phrase(self, inside_braces: bool = False) -> A.Phrase:
        t = self.tok
        if t.kind == "op" and t.text == "{":
            if inside_braces:
                self.error("nested parallel sets are not supported")
            self.advance()
            phrases = []
            while not self.at_op("}"):
                if self.at("eof"):
                    self.error("unterminated parallel set", {"}"})
                phrases.append(self.parse_phrase(inside_braces=True))
                self.fragment_end(inside_braces=True)
            self.advance()
            return A.Parallel(tuple(phrases))
        if t.kind == "keyword" and t.text in DECL_START:
            decls = []
            while self.tok.kind == "keyword" and self.tok.text in DECL_START:
                decls.append(self.parse_decl())
            return A.Decls(tuple(decls))
        if t.kind == "op" and t.text == "+":
            self.advance()
            return A.Statement("+", self.parse_expr())
        if t.kind == "op" and t.text == "-":
            self.advance()
            return A.Statement("-", self.parse_expr())
        if t.kind == "op" and t.text == "?-":
            self.advance()
            return A.InstQuery(self.parse_expr())
        if t.kind == "op" and t.text == "?":
            self.advance()
            return A.BoolQuery(self.parse_expr())
        return A.Statement("trigger", self.parse_expr())

    # -- declarations -----------------------------------------------------------

    def parse_decl(self) -> A.TypeDecl:
        mods: set[str] = set()
        kind = None
        while self.tok.kind == "keyword" and self.tok.text in MODIFIERS:
            mods.add(self.advance().text)
        if self.at_kw(*KINDS):
            kind = self.advance().text
        if kind is None:
            kind = "Act" if "Physical" in mods else "Fact"
        if "Open" in mods and "Closed" in mods:
            self.error("a type cannot be both Open and Closed")
        name = self.ident()
        domain: list[A.DomainClause] = []
        clauses: list[A.Clause] = []
        while True:
            if self.at_kw("Identified"):
                self.advance()
                self.expect("keyword", "by")
                domain.append(self.parse_identified_by())
            elif self.at_kw("Domain"):
                self.advance()
                domain.append(A.DomainLits(tuple(self.parse_domain_literals())))
            elif self.at_kw("Related"):
                self.advance()
                self.expect("keyword", "to")
                fields = [self.ident()]
                while self.at_op(","):
                    self.advance()
                    fields.append(self.ident())
                domain.append(A.RelatedTo(tuple(fields)))
            elif self.at_kw(*ROLES):
                role = self.advance().text
                domain.append(A.Role(role, self.ident()))
            elif self.tok.kind == "keyword" and self.tok.text in CLAUSE_START:
                second, ckind = CLAUSE_START[self.tok.text]
                if second is not None and not self.at("keyword", second, self.peek()):
                    break
                self.advance()
                if second is not None:
                    self.advance()
                clauses.append(A.Clause(ckind, tuple(self.parse_expr_list())))
            else:
                break
        return A.TypeDecl(kind, name, frozenset(mods), tuple(domain), tuple(clauses))

    def parse_int(self) -> int:
        neg = False
        if self.at_op("-"):
            self.advance()
            neg = True
        value = int(self.expect("int").text)
        return -value if neg else value

    def parse_identified_by(self) -> A.IdentifiedBy:
        if self.at_kw("String", "Int"):
            return A.IdentifiedBy(self.advance().text)
        if self.at("int") or self.at_op("-"):
            low = self.parse_int()
            self.expect("range")
            high = self.parse_int()
            return A.IdentifiedBy("range", low=low, high=high)
        fields = [self.ident()]
        while self.at_op("*"):
            self.advance()
            fields.append(self.ident())
        return A.IdentifiedBy("fields", tuple(fields))

    def parse_domain_literals(self) -> list:
        values: list = []
        while True:
            if self.at("string"):
                values.append(self.advance().text)
            elif self.at("ident") and is_atom_name(self.tok.text):
                values.append(self.advance().text)
            else:
                low = self.parse_int()
                if self.at("range"):
                    self.advance()
                    high = self.parse_int()
                    values.extend(range(low, high + 1))
                else:
                    values.append(low)
            if not self.at_op(","):
                return values
            self.advance()

    def parse_expr_list(self) -> list[A.Expr]:
        exprs = [self.parse_expr()]
        while True:
            if self.at_op(","):
                self.advance()
            elif not self.at_op("("):
                # a parenthesised expression directly following another one
                # continues the list even without a separating comma
                return exprs
            exprs.append(self.parse_expr())

    # -- expressions ------------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        e = self.parse_or()
        while self.at_kw("When", "Where"):
            kw = self.advance().text
            e = A.When(e, self.parse_or(), kw)
        return e

    def parse_or(self) -> A.Expr:
        e = self.parse_and()
        while self.at_op("||"):
            self.advance()
            e = A.BinOp("||", e, self.parse_and())
        return e

    def parse_and(self) -> A.Expr:
        e = self.parse_cmp()
        while self.at_op("&&"):
            self.advance()
            e = A.BinOp("&&", e, self.parse_cmp())
        return e

    def parse_cmp(self) -> A.Expr:
        e = self.parse_add()
        if self.tok.kind == "op" and self.tok.text in COMPARE:
            op = self.advance().text
            e = A.BinOp(op, e, self.parse_add())
        return e

    def parse_add(self) -> A.Expr:
        e = self.parse_mul()
        while self.at_op("+", "-"):
            op = self.advance().text
            e = A.BinOp(op, e, self.parse_mul())
        return e

    def parse_mul(self) -> A.Expr:
        e = self.parse_unary()
        while self.at_op("*", "/"):
            op = self.advance().text
            e = A.BinOp(op, e, self.parse_unary())
        return e

    def parse_unary(self) -> A.Expr:
        if self.at_op("-"):
            self.advance()
            if self.at("int"):
                return A.IntLit(-int(self.advance().text))
            return A.BinOp("-", A.IntLit(0), self.parse_unary())
        e = self.parse_primary()
        while self.at("proj"):
            self.advance()
            e = A.Proj(e, self.ident())
        return e

    def parse_parenthesised(self) -> A.Expr:
        self.expect("op", "(")
        e = self.parse_expr()
        self.expect("op", ")")
        return e

    def parse_primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text))
        if t.kind == "string":
            self.advance()
            return A.StrLit(t.text)
        if t.kind == "ident":
            self.advance()
            if is_atom_name(t.text):
                return A.StrLit(t.text)
            if self.at_op("("):
                return A.App(t.text, self.parse_args())
            return A.Ref(t.text)
        if t.kind == "op" and t.text == "(":
            return self.parse_parenthesised()
        if t.kind == "keyword":
            if t.text in ("True", "False"):
                self.advance()
                return A.BoolLit(t.text == "True")
            if t.text in QUANTIFIERS:
                self.advance()
                names = [self.ident()]
                while self.at_op(","):
                    self.advance()
                    names.append(self.ident())
                self.expect("op", ":")
                return A.Quant(t.text, tuple(names), self.parse_expr())
            if t.text in AGGREGATES:
                self.advance()
                return A.Agg(t.text, self.parse_parenthesised())
            if t.text == "Not":
                self.advance()
                return A.Not(self.parse_unary())
            if t.text in ("Holds", "Enabled", "Violated") and self.at("op", "(", self.peek()):
                self.advance()
                inner = self.parse_parenthesised()
                return {"Holds": A.Holds, "Enabled": A.Enabled, "Violated": A.Violated}[t.text](inner)
        self.error(f"unexpected {self.describe(t)}", {"expression"})

    def parse_args(self) -> tuple[A.Arg, ...]:
        self.expect("op", "(")
        args: list[A.Arg] = []
        if self.at_op(")"):
            self.advance()
            return ()
        while True:
            if self.at("ident") and self.at("op", "=", self.peek()):
                name = self.advance().text
                self.advance()
                args.append(A.Arg(name, self.parse_expr()))
            else:
                args.append(A.Arg(None, self.parse_expr()))
            if self.at_op(","):
                self.advance()
                continue
            self.expect("op", ")")
            return tuple(args)


def parse_expression(text: str) -> A.Expr:
    p = Parser(tokenize(text, "<expr>"))
    e = p.parse_expr()
    p.expect("eof")
    return e


def default_resolver(path: str, from_file: Optional[str]) -> tuple[str, str]:
    base = os.path.dirname(from_file) if from_file and not from_file.startswith("<") else os.getcwd()
    full = os.path.realpath(os.path.join(base, path))
    try:
        with open(full, encoding="utf-8") as fh:
            return full, fh.read()
    except OSError as exc:
        raise MissingFileError(f"cannot read {path!r}: {exc.strerror}") from exc


def parse_program(source: str, include_resolver: Optional[IncludeResolver] = None,
                  filename: str = "<input>") -> list[A.Phrase]:
    """Parse a program into its top-level fragments, splicing directives."""
    resolver = include_resolver or default_resolver
    required: set[str] = set()
    return _parse_file(source, filename, resolver, required, [filename])


def _parse_file(source, filename, resolver, required, stack) -> list[A.Phrase]:
    p = Parser(tokenize(source, filename))
    phrases: list[A.Phrase] = []
    while not p.at("eof"):
        if p.at("stop"):
            p.advance()  # empty fragment
            continue
        if p.at("directive"):
            which = p.advance().text
            path = p.expect("string").text
            p.fragment_end(inside_braces=False)
            canonical, text = resolver(path, filename)
            if which == "require" and canonical in required:
                continue
            if canonical in stack:
                raise IncludeCycleError(" -> ".join(stack + [canonical]))
            required.add(canonical)
            phrases.extend(_parse_file(text, canonical, resolver, required, stack + [canonical]))
            continue
        phrases.append(p.parse_phrase())
        p.fragment_end(inside_braces=False)
    return phrases
