"""Phrase execution: assertions, triggers, violations, parallel sets and history."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .derivation import ClosureReport, close
from .errors import EvalInterrupt, NotAnAction, TypeMismatch
from .evaluator import Context, EvalOptions, _elements, eval_bool, eval_instances
from .knowledge import Instance, KnowledgeBase, apply_effects, true_instances
from .syntax import ast as A
from .syntax.printer import print_phrase
from .typesystem import Registry, apply_declarations


@dataclass(frozen=True)
class State:
    id: int
    registry: Registry
    kb: KnowledgeBase
    parent: Optional[int] = None
    phrase: Optional[A.Phrase] = None
    closed: bool = True
    violations: tuple = ()


@dataclass(frozen=True)
class Violation:
    kind: str  # disabled-action | duty
    instance: Instance
    index: Optional[int] = None  # which violation condition of a duty holds

    def __str__(self) -> str:
        return f"VIOLATION {self.kind} {self.instance}"


@dataclass
class TransitionOutcome:
    state: State
    triggered: list[Instance] = field(default_factory=list)
    created: set[Instance] = field(default_factory=set)
    terminated: set[Instance] = field(default_factory=set)
    obfuscated: set[Instance] = field(default_factory=set)
    violations: list[Violation] = field(default_factory=list)
    report: Optional[ClosureReport] = None


@dataclass
class QueryResult:
    kind: str  # bool | instances
    expr: A.Expr
    value: Union[bool, list]

    @property
    def failed(self) -> bool:
        return self.kind == "bool" and self.value is not True


@dataclass
class PhraseResult:
    state: State
    outcome: Optional[TransitionOutcome] = None
    queries: list[QueryResult] = field(default_factory=list)

    @property
    def violations(self) -> list[Violation]:
        return self.outcome.violations if self.outcome else []


@dataclass
class SessionOptions:
    eval: EvalOptions = field(default_factory=EvalOptions)
    max_iters: int = 100_000
    oracle_fallback: bool = False
    atom_cap: int = 20


@dataclass
class _Effects:
    triggered: list = field(default_factory=list)
    created: set = field(default_factory=set)
    terminated: set = field(default_factory=set)
    obfuscated: set = field(default_factory=set)
    violations: list = field(default_factory=list)

    def merge(self, other: "_Effects") -> None:
        self.triggered += [i for i in other.triggered if i not in self.triggered]
        self.created |= other.created
        self.terminated |= other.terminated
        self.obfuscated |= other.obfuscated
        self.violations += other.violations


def _instances(values, what: str) -> list[Instance]:
    out = []
    for v in values:
        if not isinstance(v, Instance):
            raise TypeMismatch(f"{what} expects instances, got {v!r}")
        out.append(v)
    return out


def sync_closure(ctx: Context, roots: Iterable[Instance]) -> list[Instance]:
    """All actions reached through Syncs-with clauses, evaluated in the pre-state."""
    seen: list[Instance] = []
    visited: set[Instance] = set()
    work = list(roots)
    while work:
        inst = work.pop(0)
        if inst in visited:
            continue
        rec = ctx.registry.get(inst.type)
        if not rec.is_action:
            raise NotAnAction(f"{inst} is not an action or event")
        visited.add(inst)
        seen.append(inst)
        env = ctx.env_for(inst)
        for fn in ctx.compiler.effects(inst.type, "syncs_with"):
            for target in _instances(_elements(fn(dict(env), ctx)), "Syncs with"):
                if target not in visited:
                    work.append(target)
    return seen


def _trigger_effects(ctx: Context, roots: Iterable[Instance]) -> _Effects:
    eff = _Effects()
    members = sync_closure(ctx, roots)
    eff.triggered = members
    for inst in members:
        if not ctx.enabled(inst):
            eff.violations.append(Violation("disabled-action", inst))
    for inst in members:
        env = ctx.env_for(inst)
        for kind, bucket in (("creates", eff.created), ("terminates", eff.terminated),
                             ("obfuscates", eff.obfuscated)):
            for fn in ctx.compiler.effects(inst.type, kind):
                bucket.update(_instances(_elements(fn(dict(env), ctx)), kind))
    return eff


def _statement_effects(ctx: Context, stmt: A.Statement) -> _Effects:
    items = _instances(eval_instances(stmt.expr, ctx), "a statement")
    if stmt.kind == "+":
        return _Effects(created=set(items))
    if stmt.kind == "-":
        return _Effects(terminated=set(items))
    return _trigger_effects(ctx, items)


def duty_violations(ctx: Context) -> list[Violation]:
    out = []
    for rec in ctx.registry:
        if rec.kind != "Duty" or not rec.clause("violated_when"):
            continue
        for inst in true_instances(ctx.kb, ctx.registry, rec.name):
            for idx in ctx.violated_indices(inst):
                out.append(Violation("duty", inst, idx))
    return out


class Session:
    """A tree of states with a movable head; phrases extend the tree from the head."""

    def __init__(self, options: Optional[SessionOptions] = None):
        self.options = options or SessionOptions()
        self._ids = itertools.count()
        root = State(next(self._ids), Registry.initial(), KnowledgeBase())
        self.states: dict[int, State] = {root.id: root}
        self.head = root.id

    @property
    def state(self) -> State:
        return self.states[self.head]

    def _close(self, kb: KnowledgeBase, registry) -> tuple[KnowledgeBase, ClosureReport]:
        o = self.options
        return close(kb, registry, o.eval, o.max_iters, o.oracle_fallback, o.atom_cap)

    def _ctx(self, registry, kb) -> Context:
        return Context(registry, kb, self.options.eval)

    def revert(self, state_id: int) -> State:
        if state_id not in self.states:
            raise KeyError(f"no state with id {state_id}")
        self.head = state_id
        return self.state

    def lineage(self, state_id: Optional[int] = None) -> list[State]:
        sid = self.head if state_id is None else state_id
        out = []
        while sid is not None:
            st = self.states[sid]
            out.append(st)
            sid = st.parent
        return out[::-1]

    def _commit(self, registry, kb, phrase, violations=()) -> State:
        st = State(next(self._ids), registry, kb, self.head, phrase, True, tuple(violations))
        self.states[st.id] = st
        self.head = st.id
        return st

    def exec_phrase(self, phrase: A.Phrase,
                    additional: Optional[list[tuple[Instance, bool]]] = None) -> PhraseResult:
        """Execute one top-level fragment against the head state.

        ``additional`` truth assignments take priority over everything else and
        are discarded after the phrase; on an interrupt the head is unchanged.
        """
        base = self.state
        kb = base.kb
        if additional:
            kb = kb.with_additional(additional)
        registry = base.registry
        if isinstance(phrase, (A.Decls, A.Parallel)):
            decls = [phrase] if isinstance(phrase, A.Decls) else [
                p for p in phrase.phrases if isinstance(p, A.Decls)]
            if decls:
                registry = apply_declarations(registry, [d for p in decls for d in p.decls])
        if isinstance(phrase, A.Decls):
            return self._finish(base, registry, kb, phrase, _Effects(), [], additional)
        if additional or registry is not base.registry or not base.closed:
            kb, _ = self._close(kb, registry)
        ctx = self._ctx(registry, kb)
        queries: list[QueryResult] = []
        effects = _Effects()
        changes = False
        items = phrase.phrases if isinstance(phrase, A.Parallel) else (phrase,)
        for p in items:
            if isinstance(p, A.BoolQuery):
                queries.append(QueryResult("bool", p.expr, eval_bool(p.expr, ctx)))
            elif isinstance(p, A.InstQuery):
                queries.append(QueryResult("instances", p.expr, eval_instances(p.expr, ctx)))
            elif isinstance(p, A.Statement):
                effects.merge(_statement_effects(ctx, p))
                changes = True
        if not changes and registry is base.registry:
            return PhraseResult(base, None, queries)
        return self._finish(base, registry, kb, phrase, effects, queries, additional)

    def _finish(self, base, registry, kb, phrase, effects: _Effects, queries, additional) -> PhraseResult:
        o = self.options
        kb = apply_effects(kb, registry, effects.created, effects.terminated, effects.obfuscated,
                           o.eval.function_displacement)
        closed = True
        violations = list(effects.violations)
        try:
            kb, report = self._close(kb, registry)
        except EvalInterrupt:
            if additional:
                raise
            # closure needs input the context has not supplied yet; defer it to
            # the next phrase, which closes the state with its own input
            st = State(next(self._ids), registry, kb.with_derived({}), self.head, phrase, False,
                       tuple(violations))
            return self._store(st, effects, violations, None, queries)
        violations += duty_violations(self._ctx(registry, kb))
        if additional:
            kb = kb.without_additional()
            try:
                kb, report = self._close(kb, registry)
            except Exception:
                # the state cannot be closed without the request's input; keep it
                # unclosed so the next request closes it with its own input
                kb, closed = kb.with_derived({}), False
        st = State(next(self._ids), registry, kb, self.head, phrase, closed, tuple(violations))
        return self._store(st, effects, violations, report, queries)

    def _store(self, st: State, effects: _Effects, violations, report, queries) -> PhraseResult:
        self.states[st.id] = st
        self.head = st.id
        outcome = TransitionOutcome(st, list(effects.triggered), set(effects.created),
                                    set(effects.terminated), set(effects.obfuscated), violations, report)
        return PhraseResult(st, outcome, queries)

    def run(self, phrases: Iterable[A.Phrase]) -> list[PhraseResult]:
        return [self.exec_phrase(p) for p in phrases]


# -- functional interface -----------------------------------------------------------


def exec_statement(session: Session, stmt: A.Statement) -> TransitionOutcome:
    return session.exec_phrase(stmt).outcome


def trigger_transition(session: Session, instances: Union[Instance, Iterable[Instance]]) -> TransitionOutcome:
    """Trigger one or more action instances simultaneously from the head state."""
    roots = [instances] if isinstance(instances, Instance) else list(instances)
    base = session.state
    kb = base.kb
    if not base.closed:
        kb, _ = session._close(kb, base.registry)
    effects = _trigger_effects(session._ctx(base.registry, kb), roots)
    label = A.Statement("trigger", A.StrLit(", ".join(str(r) for r in roots)))
    return session._finish(base, base.registry, kb, label, effects, [], None).outcome


def _closed_kb(state: State, options: Optional[EvalOptions]) -> KnowledgeBase:
    return state.kb if state.closed else close(state.kb, state.registry, options)[0]


def query_bool(state: State, expr: A.Expr, options: Optional[EvalOptions] = None) -> bool:
    return eval_bool(expr, Context(state.registry, _closed_kb(state, options), options))


def query_instances(state: State, expr: A.Expr, options: Optional[EvalOptions] = None) -> list:
    return eval_instances(expr, Context(state.registry, _closed_kb(state, options), options))


def describe_phrase(phrase: Optional[A.Phrase]) -> str:
    return "" if phrase is None else print_phrase(phrase).replace("\n", " ")
