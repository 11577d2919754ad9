"""Shared helpers for the command-line front ends."""

from __future__ import annotations

import os
from typing import Optional

from ..errors import (EvalInterrupt, NonStratifiedError, NormSpecError, OpenEnumeration, ParseError,
                      UnknownInstance)
from ..evaluator import Context, EvalOptions, eval_instances
from ..knowledge import Instance
from ..syntax import parse_expression, parse_program, print_expr
from ..transition import PhraseResult, QueryResult, Session, SessionOptions

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_STRATIFICATION, EXIT_INTERRUPT = 0, 1, 2, 3, 4


def session_options(args) -> SessionOptions:
    cap = os.environ.get("NORMSPEC_ATOM_CAP")
    atom_cap = int(cap) if cap else getattr(args, "atom_cap", 20)
    return SessionOptions(
        eval=EvalOptions(empty_aggregate=getattr(args, "empty_aggregate", "sentinel")),
        max_iters=getattr(args, "max_fixpoint_iters", 100_000),
        oracle_fallback=getattr(args, "oracle_fallback", False),
        atom_cap=atom_cap)


def load_paths(paths: list[str]) -> list:
    phrases = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            phrases.extend(parse_program(fh.read(), filename=os.path.abspath(path)))
    return phrases


def missing_text(exc: EvalInterrupt) -> str:
    if isinstance(exc, UnknownInstance):
        return f"MISSING INPUT: {exc.instance}"
    if isinstance(exc, OpenEnumeration):
        return f"MISSING INPUT: {exc.type_name}"
    return f"MISSING INPUT: {exc}"


def missing_json(exc: EvalInterrupt) -> dict:
    if isinstance(exc, UnknownInstance):
        return {"instance": str(exc.instance), "type": exc.instance.type}
    if isinstance(exc, OpenEnumeration):
        return {"type": exc.type_name}
    return {"detail": str(exc)}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, NonStratifiedError):
        return EXIT_STRATIFICATION
    if isinstance(exc, EvalInterrupt):
        return EXIT_INTERRUPT
    return EXIT_FAILED


def query_text(q: QueryResult) -> str:
    expr = print_expr(q.expr)
    if q.kind == "bool":
        return f"?{expr}: {q.value}"
    return f"?-{expr}: [" + ", ".join(str(v) for v in q.value) + "]"


def query_json(q: QueryResult) -> dict:
    value = q.value if q.kind == "bool" else [str(v) for v in q.value]
    return {"kind": "query", "query": q.kind, "expr": print_expr(q.expr), "value": value}


def result_json(r: PhraseResult) -> list[dict]:
    out = [query_json(q) for q in r.queries]
    for v in r.violations:
        out.append({"kind": "violation", "violation": v.kind, "instance": str(v.instance)})
    return out


def parse_instance(session: Session, text: str) -> Instance:
    """A ground instance written as an expression, e.g. ``user(Eve)``."""
    st = session.state
    values = eval_instances(parse_expression(text), Context(st.registry, st.kb, session.options.eval))
    if len(values) != 1 or not isinstance(values[0], Instance):
        raise NormSpecError(f"{text!r} does not denote a single instance")
    return values[0]


def describe_error(exc: BaseException) -> str:
    if isinstance(exc, EvalInterrupt):
        return missing_text(exc)
    name = type(exc).__name__
    return f"error ({name}): {exc}"


def first_line(text: Optional[str]) -> str:
    return (text or "").splitlines()[0] if text else ""
