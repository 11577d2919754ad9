"""Shared helpers for the test modules."""

from __future__ import annotations

from pathlib import Path

from normspec.evaluator import Context, eval_instances
from normspec.knowledge import KnowledgeBase, apply_effects, held_set
from normspec.syntax import ast as A
from normspec.syntax import parse_program
from normspec.transition import Session, SessionOptions
from normspec.typesystem import Registry, apply_declarations

TESTS = Path(__file__).parent
CORPUS = TESTS / "corpus"
GOLDEN = CORPUS / "golden"
REJECTED = CORPUS / "rejected"

ACCEPTANCE: list[str] = []  # PASS/FAIL lines, printed in the terminal summary


def corpus_text(relpath: str) -> str:
    return (CORPUS / relpath).read_text(encoding="utf-8")


def run_text(text: str, options: SessionOptions | None = None) -> tuple[Session, list]:
    session = Session(options)
    results = [session.exec_phrase(p) for p in parse_program(text)]
    return session, results


def base_state(text: str) -> tuple[Registry, KnowledgeBase]:
    """Registry and asserted facts of a program, without running derivation.

    Only declarations and ``+``/``-`` statements over ground instances are supported.
    """
    reg, kb = Registry.initial(), KnowledgeBase()
    for phrase in parse_program(text):
        if isinstance(phrase, A.Decls):
            reg = apply_declarations(reg, phrase.decls)
        elif isinstance(phrase, A.Statement) and phrase.kind in "+-":
            insts = eval_instances(phrase.expr, Context(reg, kb))
            if phrase.kind == "+":
                kb = apply_effects(kb, reg, insts)
            else:
                kb = apply_effects(kb, reg, (), insts)
        else:
            raise ValueError(f"unsupported phrase in base state: {phrase!r}")
    return reg, kb


def held_strs(session: Session, types=None) -> set[str]:
    st = session.state
    return {str(i) for i in held_set(st.kb, st.registry, types)}


def bool_queries(results) -> list[bool]:
    return [q.value for r in results for q in r.queries if q.kind == "bool"]


def sieve(n: int) -> set[int]:
    """Primes up to n by trial division."""
    primes: list[int] = []
    for k in range(2, n + 1):
        if all(k % p for p in primes if p * p <= k):
            primes.append(k)
    return set(primes)
