"""Canonical source rendering of phrases and expressions.

Output reparses to a structurally equal AST; parentheses are inserted only
where operator precedence requires them.
"""

from __future__ import annotations

import re

from . import ast as A
from .lexer import KEYWORDS

P_QUANT, P_WHEN, P_OR, P_AND, P_CMP, P_ADD, P_MUL, P_UNARY, P_ATOM = range(9)

_BINARY_PREC = {"||": P_OR, "&&": P_AND, "+": P_ADD, "-": P_ADD, "*": P_MUL, "/": P_MUL}
_BARE_ATOM = re.compile(r"[A-Z][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*")


def render_string(text: str) -> str:
    if _BARE_ATOM.fullmatch(text) and text not in KEYWORDS:
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render(e: A.Expr) -> tuple[str, int]:
    if isinstance(e, A.IntLit):
        return str(e.value), (P_UNARY if e.value < 0 else P_ATOM)
    if isinstance(e, A.StrLit):
        return render_string(e.value), P_ATOM
    if isinstance(e, A.BoolLit):
        return ("True" if e.value else "False"), P_ATOM
    if isinstance(e, A.Ref):
        return e.name, P_ATOM
    if isinstance(e, A.App):
        args = ", ".join(
            (f"{a.name} = " if a.name is not None else "") + print_expr(a.expr) for a in e.args)
        return f"{e.name}({args})", P_ATOM
    if isinstance(e, A.Proj):
        inner = print_expr(e.expr)
        if not isinstance(e.expr, (A.Ref, A.App, A.Proj)):
            inner = f"({inner})"
        return f"{inner}.{e.field}", P_UNARY
    if isinstance(e, A.BinOp):
        if e.op in A.COMPARE_OPS:
            return f"{print_expr(e.left, P_ADD)} {e.op} {print_expr(e.right, P_ADD)}", P_CMP
        prec = _BINARY_PREC[e.op]
        if e.op == "-" and e.left == A.IntLit(0) and not isinstance(e.right, A.IntLit):
            return f"-{print_expr(e.right, P_UNARY)}", P_UNARY
        return f"{print_expr(e.left, prec)} {e.op} {print_expr(e.right, prec + 1)}", prec
    if isinstance(e, A.Not):
        return f"Not({print_expr(e.expr)})", P_ATOM
    if isinstance(e, (A.Holds, A.Enabled, A.Violated)):
        return f"{type(e).__name__}({print_expr(e.expr)})", P_ATOM
    if isinstance(e, A.Quant):
        return f"{e.kind} {', '.join(e.vars)}: {print_expr(e.body)}", P_QUANT
    if isinstance(e, A.Agg):
        return f"{e.kind}({print_expr(e.body)})", P_ATOM
    if isinstance(e, A.When):
        return f"{print_expr(e.expr, P_WHEN)} {e.keyword} {print_expr(e.guard, P_OR)}", P_WHEN
    raise TypeError(f"not an expression: {e!r}")


def print_expr(e: A.Expr, min_prec: int = P_QUANT) -> str:
    text, prec = _render(e)
    return f"({text})" if prec < min_prec else text


def _print_literal(v) -> str:
    return str(v) if isinstance(v, int) else render_string(v)


def _print_domain(d: A.DomainClause) -> str:
    if isinstance(d, A.IdentifiedBy):
        if d.kind in ("String", "Int"):
            return f"Identified by {d.kind}"
        if d.kind == "range":
            return f"Identified by {d.low}..{d.high}"
        return "Identified by " + " * ".join(d.fields)
    if isinstance(d, A.DomainLits):
        return "Domain " + ", ".join(_print_literal(v) for v in d.values)
    if isinstance(d, A.RelatedTo):
        return "Related to " + ", ".join(d.fields)
    return f"{d.role} {d.field}"


def print_decl(d: A.TypeDecl) -> str:
    words = []
    for mod in ("Extend", "Open", "Closed", "Var", "Function", "Bool", "Physical"):
        if mod in d.modifiers:
            words.append(mod)
    implied = ("Physical" in d.modifiers and d.kind == "Act") or (
        d.kind == "Fact" and d.modifiers & {"Var", "Function", "Bool"})
    if not implied:
        words.append(d.kind)
    words.append(d.name)
    lines = [" ".join(words)]
    for dc in d.domain:
        lines.append("  " + _print_domain(dc))
    for clause in d.clauses:
        keyword = " ".join(A.CLAUSE_KEYWORDS[clause.kind])
        lines.append(f"  {keyword} " + ", ".join(print_expr(e) for e in clause.exprs))
    return "\n".join(lines)


def _print_body(p: A.Phrase) -> str:
    if isinstance(p, A.Decls):
        return "\n".join(print_decl(d) for d in p.decls)
    if isinstance(p, A.Statement):
        prefix = {"+": "+", "-": "-", "trigger": ""}[p.kind]
        body = print_expr(p.expr)
        if p.kind == "trigger" and body[:1] in "+-?{":
            body = f"({body})"
        return prefix + body
    if isinstance(p, A.BoolQuery):
        body = print_expr(p.expr)
        return "?" + (f"({body})" if body.startswith("-") else body)
    if isinstance(p, A.InstQuery):
        return "?-" + print_expr(p.expr)
    if isinstance(p, A.Parallel):
        return "{ " + ". ".join(_print_body(q) for q in p.phrases) + " }"
    raise TypeError(f"not a phrase: {p!r}")


def print_phrase(p: A.Phrase) -> str:
    """Render one top-level fragment, including its terminating full stop."""
    return _print_body(p) + "."


def print_program(phrases) -> str:
    return "\n".join(print_phrase(p) for p in phrases) + "\n"
