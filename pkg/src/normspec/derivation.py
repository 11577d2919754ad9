"""Closure of a knowledge base under derivation rules, with stratification analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import networkx as nx

from .errors import FixpointBudgetExceeded, NonStratifiedError
from .evaluator import Context, EvalOptions, Expander, NonMonotoneLookup, derive_type
from .knowledge import Instance, KnowledgeBase
from .syntax import ast as A

RULE_CLAUSES = ("derived_from", "holds_when", "conditioned_by")
DEFAULT_MAX_ITERS = 100_000


# -- dependency analysis ------------------------------------------------------------


def _mentions(reg, e: A.Expr, pol: int, truth: bool) -> Iterator[tuple[str, int]]:
    """Types consulted by an expanded expression, with the polarity of each consultation.

    ``truth`` says whether the value of ``e`` is tested for truth; plain values
    (constructor arguments, operands of comparisons) consult nothing.
    """
    if isinstance(e, A.Ref):
        if truth:
            t = reg.resolve_name(e.name)
            if t is not None:
                yield t, pol
    elif isinstance(e, A.App):
        if truth:
            yield e.name, pol
        for a in e.args:
            yield from _mentions(reg, a.expr, 0, False)
    elif isinstance(e, A.Proj):
        yield from _mentions(reg, e.expr, 0, False)
        if truth:
            t = _static_type(reg, e)
            if t is not None:
                yield t, pol
    elif isinstance(e, A.BinOp):
        if e.op in A.BOOL_OPS:
            yield from _mentions(reg, e.left, pol, True)
            yield from _mentions(reg, e.right, pol, True)
        else:
            yield from _mentions(reg, e.left, 0, False)
            yield from _mentions(reg, e.right, 0, False)
    elif isinstance(e, A.Not):
        yield from _mentions(reg, e.expr, -pol, True)
    elif isinstance(e, A.Holds):
        yield from _mentions(reg, e.expr, pol, True)
    elif isinstance(e, (A.Enabled, A.Violated)):
        yield from _mentions(reg, e.expr, 0, True)
    elif isinstance(e, A.Quant):
        dom_pol = -pol if e.kind == "Forall" else pol
        for v in e.vars:
            t = reg.resolve_name(v)
            if t is not None:
                yield t, dom_pol
        if e.kind == "Foreach":
            yield from _mentions(reg, e.body, pol, truth)
        elif e.kind == "Forall" and isinstance(e.body, A.When):
            yield from _mentions(reg, e.body.expr, pol, True)
            yield from _mentions(reg, e.body.guard, -pol, True)
        else:
            yield from _mentions(reg, e.body, pol, True)
    elif isinstance(e, A.Agg):
        yield from _mentions(reg, e.body, 0, False)
    elif isinstance(e, A.When):
        yield from _mentions(reg, e.expr, pol, truth)
        yield from _mentions(reg, e.guard, pol, True)


def _static_type(reg, e: A.Expr) -> Optional[str]:
    if isinstance(e, A.Ref):
        return reg.resolve_name(e.name)
    if isinstance(e, A.App):
        return e.name
    if isinstance(e, A.Proj):
        base = _static_type(reg, e.expr)
        if base is None or base not in reg or reg.get(base).is_primitive:
            return None
        for label, t in reg.field_types(base):
            if label == e.field:
                return t
    return None


def _rule_expressions(reg, rec) -> Iterator[tuple[A.Expr, bool]]:
    """Expanded rule expressions of a type, each with its 'tested for truth' flag."""
    ex = Expander(reg)
    labels = (rec.name,) if rec.is_primitive else rec.fields
    for e in rec.clause("derived_from"):
        body, free = ex.expand(e, frozenset())
        yield (A.Quant("Foreach", tuple(free), body) if free else body), False
    for e in rec.clause("holds_when"):
        guard, free = ex.expand(e, frozenset(labels))
        vars_ = tuple(labels) + tuple(n for n in free if n not in labels)
        yield A.Quant("Foreach", vars_, A.When(A.BoolLit(True), guard)), False
    for e in rec.clause("conditioned_by"):
        body, free = ex.expand(e, frozenset(labels))
        yield (A.Quant("Exists", tuple(free), body) if free else body), True


@dataclass
class DependencyGraph:
    graph: nx.DiGraph  # edge attribute "negative": bool

    @property
    def edges(self) -> list[tuple[str, str, str]]:
        return sorted((a, b, "negative" if d["negative"] else "positive")
                      for a, b, d in self.graph.edges(data=True))


def build_dependency_graph(registry) -> DependencyGraph:
    """Type-level graph: an edge T -> U when a rule of T consults U."""
    g = nx.DiGraph()
    for rec in registry:
        g.add_node(rec.name)
    for rec in registry:
        for expr, truth in _rule_expressions(registry, rec):
            for t, pol in _mentions(registry, expr, 1, truth):
                if t not in registry:
                    continue
                negative = pol <= 0
                if g.has_edge(rec.name, t):
                    g.edges[rec.name, t]["negative"] |= negative
                else:
                    g.add_edge(rec.name, t, negative=negative)
    return DependencyGraph(g)


@dataclass(frozen=True)
class Stratified:
    strata: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class NonStratified:
    cycle: tuple[str, ...]
    diagnostic: str


def format_cycle(g: nx.DiGraph, cycle: list[str]) -> str:
    parts = [cycle[0]]
    for a, b in zip(cycle, cycle[1:]):
        arrow = "-[neg]->" if g.edges[a, b]["negative"] else "->"
        parts.append(f"{arrow} {b}")
    return " ".join(parts)


def _strata(g: nx.DiGraph) -> tuple[tuple[str, ...], ...]:
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    comps: dict[int, list[str]] = {}
    for node, c in members.items():
        comps.setdefault(c, []).append(node)
    order = nx.lexicographical_topological_sort(cond.reverse(copy=True), key=lambda c: min(comps[c]))
    return tuple(tuple(sorted(comps[c])) for c in order)


def negative_cycle(g: nx.DiGraph) -> Optional[list[str]]:
    """One cycle through a negative edge, as a closed node list, if any exists."""
    for comp in sorted(nx.strongly_connected_components(g), key=min):
        sub = g.subgraph(comp)
        for a, b, d in sorted(sub.edges(data=True)):
            if d["negative"]:
                path = nx.shortest_path(sub, b, a)
                return [a] + path
    return None


def check_stratification(dg: DependencyGraph) -> Union[Stratified, NonStratified]:
    cycle = negative_cycle(dg.graph)
    if cycle is not None:
        return NonStratified(tuple(cycle), format_cycle(dg.graph, cycle))
    return Stratified(_strata(dg.graph))


# -- closure ----------------------------------------------------------------------


@dataclass
class ClosureReport:
    derived: set[Instance] = field(default_factory=set)
    strata: list[tuple[str, ...]] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)


@dataclass
class _Analysis:
    graph: DependencyGraph
    strata: tuple[tuple[str, ...], ...]


def analysis_for(registry) -> _Analysis:
    cached = getattr(registry, "_analysis", None)
    if cached is None:
        dg = build_dependency_graph(registry)
        cached = _Analysis(dg, _strata(dg.graph))
        registry._analysis = cached
    return cached


def _with(kb: KnowledgeBase, base: dict, extra: dict) -> KnowledgeBase:
    merged = dict(base)
    merged.update({t: frozenset(s) for t, s in extra.items()})
    return kb.with_derived(merged)


def close(kb: KnowledgeBase, registry, options: Optional[EvalOptions] = None,
          max_iters: int = DEFAULT_MAX_ITERS, oracle_fallback: bool = False,
          atom_cap: int = 20) -> tuple[KnowledgeBase, ClosureReport]:
    """Recompute the derived layer from scratch, stratum by stratum."""
    an = analysis_for(registry)
    g = an.graph.graph
    report = ClosureReport()
    derived: dict[str, frozenset] = {}
    for stratum in an.strata:
        rule_types = [t for t in stratum if registry.get(t).has_rules]
        if not rule_types:
            continue
        recursive = len(stratum) > 1 or g.has_edge(stratum[0], stratum[0])
        negative = any(g.edges[a, b]["negative"] for a in stratum for b in stratum if g.has_edge(a, b))
        if not recursive:
            ctx = Context(registry, kb.with_derived(derived), options)
            derived[rule_types[0]] = frozenset(derive_type(ctx, rule_types[0]))
            iters, method = 1, "single"
        elif not negative:
            result, iters = _least_fixpoint(kb, registry, derived, rule_types, options, max_iters)
            derived.update(result)
            method = "fixpoint"
        else:
            try:
                result, iters = _alternating(kb, registry, derived, stratum, rule_types, options, max_iters)
                method = "alternating"
            except NonStratifiedError:
                if not oracle_fallback:
                    raise
                result = _oracle_stratum(kb, registry, derived, rule_types, options, atom_cap, g, stratum)
                iters, method = 0, "oracle"
            derived.update(result)
        report.strata.append(stratum)
        report.iterations.append(iters)
        report.methods.append(method)
    out = kb.with_derived({t: s for t, s in derived.items() if s})
    report.derived = out.all_derived()
    return out, report


def _least_fixpoint(kb, registry, base, types, options, max_iters, neg_kb=None, alt_types=()):
    current: dict[str, set] = {t: set() for t in types}
    for i in range(1, max_iters + 1):
        kb_pos = _with(kb, base, current)
        ctx = Context(registry, kb_pos, options)
        if alt_types:
            ctx = ctx.alternating(alt_types, kb_pos, neg_kb)
        changed = False
        for t in types:
            new = derive_type(ctx, t)
            if not new <= current[t]:
                current[t] |= new
                changed = True
        if not changed:
            return current, i
    raise FixpointBudgetExceeded(f"no fixpoint within {max_iters} iterations for {', '.join(types)}")


def _alternating(kb, registry, base, stratum, types, options, max_iters):
    """Alternating fixpoint; succeeds only when the lower and upper bounds meet."""
    g = analysis_for(registry).graph.graph

    def gamma(fixed: dict) -> tuple[dict, int]:
        neg_kb = _with(kb, base, fixed)
        try:
            return _least_fixpoint(kb, registry, base, types, options, max_iters, neg_kb, stratum)
        except NonMonotoneLookup as exc:
            cycle = negative_cycle(g.subgraph(stratum)) or [exc.type_name, exc.type_name]
            raise NonStratifiedError(format_cycle(g, cycle),
                                     f"{exc.type_name} is used non-monotonically") from None

    lower: dict = {t: set() for t in types}
    total = 0
    for _ in range(max_iters):
        upper, n1 = gamma(lower)
        new_lower, n2 = gamma(upper)
        total += n1 + n2
        if new_lower == lower:
            break
        lower = new_lower
    if lower != upper:
        cycle = negative_cycle(g.subgraph(stratum))
        text = format_cycle(g, cycle) if cycle else " -> ".join(stratum)
        undecided = set().union(*upper.values()) - set().union(*lower.values())
        sample = ", ".join(sorted(str(i) for i in undecided)[:3])
        raise NonStratifiedError(text, f"no unique interpretation; undecided: {sample}")
    return lower, total


def _oracle_stratum(kb, registry, base, types, options, atom_cap, g, stratum):
    from .oracle import Verdict, stable_models

    report = stable_models(registry, _with(kb, base, {}), atom_cap=atom_cap, options=options)
    if report.verdict is not Verdict.UNIQUE:
        cycle = negative_cycle(g.subgraph(stratum))
        text = format_cycle(g, cycle) if cycle else " -> ".join(stratum)
        raise NonStratifiedError(text, f"oracle verdict: {report.describe()}")
    model = report.models[0]
    return {t: {i for i in model if i.type == t} for t in types}
