"""Brute-force stable-model oracle for small ground universes.

Rules are grounded symbolically: every expression evaluates to a list of
alternatives ``(value, condition)`` where the condition is a formula in
disjunctive normal form over the truth of derivable atoms.  Facts fixed by the
knowledge base are folded in as constants.  Each disjunct of a rule's
condition becomes one propositional rule ``head :- pos, not neg``, and stable
models are found by checking every subset of atoms against its reduct.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (EmptyAggregate, TypeMismatch, UngroundableOpenType, UniverseTooLarge,
                     UnsupportedExpression)
from .evaluator import NEG_INF, POS_INF, EvalOptions, Expander, _arith, _compare, coerce, unwrap
from .knowledge import Instance, KnowledgeBase, TruthValue, canonical, true_instances, value_key
from .syntax import ast as A

DEFAULT_ATOM_CAP = 20
MAX_AGGREGATE_BRANCHING = 12

# -- formulas in DNF ----------------------------------------------------------------
# A formula is a frozenset of disjuncts; a disjunct is a pair (pos, neg) of atom sets.

TRUE = frozenset({(frozenset(), frozenset())})
FALSE: frozenset = frozenset()


def _simplify(disjuncts: Iterable) -> frozenset:
    items = {d for d in disjuncts if not (d[0] & d[1])}
    if len(items) < 2:
        return frozenset(items)
    ordered = sorted(items, key=lambda d: len(d[0]) + len(d[1]))
    kept: list = []
    for p, n in ordered:
        if not any(kp <= p and kn <= n for kp, kn in kept):
            kept.append((p, n))
    return frozenset(kept)


def f_and(a: frozenset, b: frozenset) -> frozenset:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    if not a or not b:
        return FALSE
    return _simplify((p1 | p2, n1 | n2) for p1, n1 in a for p2, n2 in b)


def f_or(a: frozenset, b: frozenset) -> frozenset:
    if a == TRUE or b == TRUE:
        return TRUE
    return _simplify(a | b)


def f_not(a: frozenset) -> frozenset:
    if not a:
        return TRUE
    if a == TRUE:
        return FALSE
    out = TRUE
    for p, n in a:
        clause = FALSE
        for atom in p:
            clause = f_or(clause, frozenset({(frozenset(), frozenset({atom}))}))
        for atom in n:
            clause = f_or(clause, frozenset({(frozenset({atom}), frozenset())}))
        out = f_and(out, clause)
        if not out:
            break
    return out


def f_atom(inst: Instance) -> frozenset:
    return frozenset({(frozenset({inst}), frozenset())})


def f_const(flag: bool) -> frozenset:
    return TRUE if flag else FALSE


# -- ground programs ----------------------------------------------------------------


@dataclass(frozen=True)
class GroundRule:
    head: Instance
    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def __str__(self) -> str:
        body = [str(a) for a in canonical(self.pos)] + [f"not {a}" for a in canonical(self.neg)]
        return f"{self.head}" + (" :- " + ", ".join(body) if body else "") + "."


class Verdict(enum.Enum):
    ZERO = "Zero"
    UNIQUE = "Unique"
    MULTIPLE = "Multiple"


@dataclass
class StableModelReport:
    models: list[frozenset]
    atoms: list[Instance] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        if not self.models:
            return Verdict.ZERO
        return Verdict.UNIQUE if len(self.models) == 1 else Verdict.MULTIPLE

    def describe(self) -> str:
        if self.verdict is Verdict.MULTIPLE:
            return f"Multiple({len(self.models)})"
        return self.verdict.value


@dataclass
class Grounding:
    rules: list[GroundRule]
    atoms: list[Instance]
    fixed_true: set[Instance]  # instances held regardless of the rules


class _Grounder:
    def __init__(self, registry, kb: KnowledgeBase, atom_cap: int, options: Optional[EvalOptions]):
        self.reg = registry
        self.kb = kb
        self.cap = atom_cap
        self.options = options or EvalOptions()
        self.expander = Expander(registry)
        self.rule_types = [r.name for r in registry if r.has_rules]
        self.heads: set[Instance] = set()

    # truth of ground instances -------------------------------------------------

    def fixed(self, inst: Instance) -> Optional[TruthValue]:
        layer = self.kb.additional.get(inst.type)
        if layer and inst in layer:
            return TruthValue.of(layer[inst])
        layer = self.kb.asserted.get(inst.type)
        if layer and inst in layer:
            return layer[inst]
        return None

    def truth(self, inst: Instance) -> frozenset:
        rec = self.reg.get(inst.type)
        value = self.fixed(inst)
        if value is TruthValue.UNKNOWN and rec.is_open:
            raise UngroundableOpenType(f"{inst} is Unknown")
        if value is not None:
            return f_const(value is TruthValue.TRUE)
        if rec.has_rules and inst in self.heads:
            return f_atom(inst)
        if rec.is_open:
            raise UngroundableOpenType(f"{inst} is Unknown")
        return FALSE

    def holds(self, inst: Instance) -> frozenset:
        rec = self.reg.get(inst.type)
        default = rec.is_physical or (rec.kind == "Event" and not rec.has_rules)
        if default and self.fixed(inst) is None:
            return TRUE
        return self.truth(inst)

    def universe(self, type_name: str) -> list[tuple[Instance, frozenset]]:
        reg = self.reg
        if reg.is_finite(type_name):
            return [(i, TRUE) for i in reg.domain_of(type_name).instances]
        rec = reg.get(type_name)
        if rec.is_open and not self.kb.has_additional_for(type_name):
            raise UngroundableOpenType(f"cannot enumerate open type {type_name}")
        candidates = set(self.kb.additional.get(type_name, {})) | set(self.kb.asserted.get(type_name, {}))
        candidates |= {h for h in self.heads if h.type == type_name}
        out = []
        for inst in canonical(candidates):
            cond = self.truth(inst)
            if cond:
                out.append((inst, cond))
        return out

    # conditional values ---------------------------------------------------------

    def truthy(self, v, witness: bool = False) -> frozenset:
        if witness and isinstance(v, (int, str)) and not isinstance(v, bool):
            return TRUE
        if v is True or v is False:
            return f_const(v)
        if isinstance(v, Instance):
            return self.truth(v)
        raise TypeMismatch(f"expected a Boolean, got {v!r}")

    def cond(self, e: A.Expr, env: dict, witness: bool = False) -> frozenset:
        """Condition under which ``e`` is true (undefined counts as false).

        In a quantifier body (``witness``) any defined number or string counts as true.
        """
        if isinstance(e, A.BoolLit):
            return f_const(e.value)
        if isinstance(e, A.BinOp) and e.op == "&&":
            left = self.cond(e.left, env)
            return f_and(left, self.cond(e.right, env)) if left else FALSE
        if isinstance(e, A.BinOp) and e.op == "||":
            left = self.cond(e.left, env)
            return TRUE if left == TRUE else f_or(left, self.cond(e.right, env))
        if isinstance(e, A.Not):
            return f_not(self.cond(e.expr, env))
        if isinstance(e, A.Holds):
            out = FALSE
            for v, c in self.elems(e.expr, env):
                if not isinstance(v, Instance):
                    raise TypeMismatch("Holds expects an instance")
                out = f_or(out, f_and(c, self.holds(v)))
            return out
        if isinstance(e, (A.Enabled, A.Violated)):
            raise UnsupportedExpression(f"{type(e).__name__} is not supported by the oracle")
        if isinstance(e, A.Quant) and e.kind == "Exists":
            out = FALSE
            for binding, c in self.bindings(e.vars, env):
                out = f_or(out, f_and(c, self.cond(e.body, binding, True)))
            return out
        if isinstance(e, A.Quant) and e.kind == "Forall":
            out = TRUE
            for binding, c in self.bindings(e.vars, env):
                fail = FALSE
                for v, vc in self.values(e.body, binding):
                    fail = f_or(fail, f_and(vc, f_not(self.truthy(v, True))))
                out = f_and(out, f_not(f_and(c, fail)))
                if not out:
                    break
            return out
        if isinstance(e, A.When):
            guard = self.cond(e.guard, env)
            return f_and(guard, self.cond(e.expr, env, witness)) if guard else FALSE
        out = FALSE
        for v, c in self.elems(e, env):
            out = f_or(out, f_and(c, self.truthy(v, witness)))
        return out

    def bindings(self, vars_, env: dict):
        types = [self.reg.resolve_name(v) for v in vars_]
        for v, t in zip(vars_, types):
            if t is None:
                raise TypeMismatch(f"{v!r} does not name a type")
        domains = [self.universe(t) for t in types]
        for combo in itertools.product(*domains):
            binding = dict(env)
            c = TRUE
            for v, (inst, ic) in zip(vars_, combo):
                binding[v] = inst
                c = f_and(c, ic)
            if c:
                yield binding, c

    def elems(self, e: A.Expr, env: dict) -> list[tuple[object, frozenset]]:
        """Elements denoted by ``e``: a Foreach contributes one entry per produced value."""
        if isinstance(e, A.Quant) and e.kind == "Foreach":
            acc: dict = {}
            for binding, c in self.bindings(e.vars, env):
                for v, vc in self.elems(e.body, binding):
                    _merge(acc, v, f_and(c, vc))
            return list(acc.items())
        return self.values(e, env)

    def values(self, e: A.Expr, env: dict) -> list[tuple[object, frozenset]]:
        if isinstance(e, (A.IntLit, A.StrLit, A.BoolLit)):
            return [(e.value, TRUE)]
        if isinstance(e, A.Ref):
            if e.name not in env:
                raise TypeMismatch(f"unbound variable {e.name}")
            return [(env[e.name], TRUE)]
        if isinstance(e, A.App):
            return self._app(e, env)
        if isinstance(e, A.Proj):
            out: dict = {}
            for v, c in self.values(e.expr, env):
                if not isinstance(v, Instance):
                    raise TypeMismatch(f"cannot project .{e.field}")
                idx = self.reg.field_index(v.type, e.field)
                if idx is None:
                    raise TypeMismatch(f"{v.type} has no field {e.field!r}")
                _merge(out, v.args[idx], c)
            return list(out.items())
        if isinstance(e, A.BinOp) and e.op not in A.BOOL_OPS:
            out = {}
            for (a, ca), (b, cb) in itertools.product(self.values(e.left, env), self.values(e.right, env)):
                c = f_and(ca, cb)
                if not c:
                    continue
                r = _compare(e.op, a, b) if e.op in A.COMPARE_OPS else _arith(e.op, a, b)
                _merge(out, r, c)
            return list(out.items())
        if isinstance(e, A.Agg):
            return self._agg(e, env)
        if isinstance(e, A.When):
            guard = self.cond(e.guard, env)
            if not guard:
                return []
            return [(v, f_and(guard, c)) for v, c in self.values(e.expr, env) if f_and(guard, c)]
        if isinstance(e, A.Quant) and e.kind == "Foreach":
            raise UnsupportedExpression("a Foreach is only supported where elements are expected")
        c = self.cond(e, env)
        out = []
        if c:
            out.append((True, c))
        nc = f_not(c)
        if nc:
            out.append((False, nc))
        return out

    def _app(self, e: A.App, env: dict):
        rec = self.reg.get(e.name)
        if rec.is_primitive:
            ftypes = [e.name]
        else:
            ftypes = [t for _, t in self.reg.field_types(e.name)]
        choices = [self.values(a.expr, env) for a in e.args]
        out: dict = {}
        for combo in itertools.product(*choices):
            c = TRUE
            for _, vc in combo:
                c = f_and(c, vc)
            if not c:
                continue
            if rec.is_primitive:
                inst = coerce(combo[0][0], e.name, self.reg)
            else:
                inst = Instance(e.name, tuple(coerce(v, t, self.reg) for (v, _), t in zip(combo, ftypes)))
            _merge(out, inst, c)
        return list(out.items())

    def _agg(self, e: A.Agg, env: dict):
        items = self.elems(e.body, env)
        certain = [v for v, c in items if c == TRUE]
        uncertain = [(v, c) for v, c in items if c != TRUE]
        if len(uncertain) > MAX_AGGREGATE_BRANCHING:
            raise UniverseTooLarge(f"aggregate over {len(uncertain)} undetermined elements")
        out: dict = {}
        for mask in itertools.product((False, True), repeat=len(uncertain)):
            c = TRUE
            chosen = list(certain)
            for take, (v, vc) in zip(mask, uncertain):
                c = f_and(c, vc if take else f_not(vc))
                if not c:
                    break
                if take:
                    chosen.append(v)
            if c:
                _merge(out, self._aggregate(e.kind, chosen), c)
        return list(out.items())

    def _aggregate(self, kind: str, items: list):
        if kind == "Count":
            return len(items)
        nums = [unwrap(x) for x in items]
        for x in nums:
            if not isinstance(x, (int, float)) or isinstance(x, bool):
                raise TypeMismatch(f"{kind} over a non-number")
        if kind == "Sum":
            return sum(nums)
        if not nums:
            if self.options.empty_aggregate == "error":
                raise EmptyAggregate(f"{kind} over an empty enumeration")
            return NEG_INF if kind == "Max" else POS_INF
        return max(nums) if kind == "Max" else min(nums)

    # rules ------------------------------------------------------------------------

    def rule_conditions(self) -> dict[Instance, frozenset]:
        """Head instance -> condition under which some rule derives it (before suppression)."""
        heads: dict = {}
        for t in self.rule_types:
            rec = self.reg.get(t)
            labels = (t,) if rec.is_primitive else rec.fields
            for e in rec.clause("derived_from"):
                body, free = self.expander.expand(e, frozenset())
                expr = A.Quant("Foreach", tuple(free), body) if free else body
                for v, c in self.elems(expr, {}):
                    _merge(heads, coerce(v, t, self.reg), c)
            for e in rec.clause("holds_when"):
                guard, free = self.expander.expand(e, frozenset(labels))
                vars_ = tuple(labels) + tuple(n for n in free if n not in labels)
                for binding, c in self.bindings(vars_, {}):
                    g = self.cond(guard, binding)
                    if not g:
                        continue
                    if rec.is_primitive:
                        head = binding[t]
                    else:
                        head = Instance(t, tuple(binding[l] for l in labels))
                    _merge(heads, head, f_and(c, g))
        return heads

    def suppression(self, head: Instance) -> frozenset:
        """Condition under which every Conditioned-by clause of the head's type holds."""
        rec = self.reg.get(head.type)
        env = {head.type: head} if rec.is_primitive else dict(zip(rec.fields, head.args))
        c = TRUE
        for e in rec.clause("conditioned_by"):
            body, free = self.expander.expand(e, frozenset(env))
            expr = A.Quant("Exists", tuple(free), body) if free else body
            c = f_and(c, self.cond(expr, env))
            if not c:
                break
        return c

    def ground(self) -> Grounding:
        # grow the candidate heads until stable: a sound over-approximation of the derivable atoms
        while True:
            conds = self.rule_conditions()
            new = {h for h, c in conds.items() if c and self.fixed(h) is None}
            if new <= self.heads:
                break
            self.heads |= new
            if len(self.heads) > self.cap:
                raise UniverseTooLarge(f"more than {self.cap} ground atoms")
        rules = []
        for head in canonical(conds):
            if head not in self.heads:
                continue
            full = f_and(conds[head], self.suppression(head))
            for p, n in sorted(full, key=lambda d: (sorted(map(value_key, d[0])), sorted(map(value_key, d[1])))):
                rules.append(GroundRule(head, p, n))
        fixed_true = set()
        for rec in self.reg:
            fixed_true.update(i for i in true_instances(self.kb.with_derived({}), self.reg, rec.name))
        return Grounding(rules, canonical(self.heads), fixed_true)


def _merge(acc: dict, value, c: frozenset) -> None:
    if not c:
        return
    acc[value] = f_or(acc[value], c) if value in acc else c


def ground(registry, kb: KnowledgeBase, atom_cap: int = DEFAULT_ATOM_CAP,
           options: Optional[EvalOptions] = None) -> Grounding:
    """Ground every derivation rule of the registry against the base facts of ``kb``."""
    return _Grounder(registry, kb, atom_cap, options).ground()


def enumerate_stable_models(rules: list[GroundRule], atoms: Iterable[Instance]) -> StableModelReport:
    """Check every subset of ``atoms`` against the least model of its reduct."""
    atoms = canonical(set(atoms))
    index = {a: i for i, a in enumerate(atoms)}

    def mask(items) -> int:
        m = 0
        for a in items:
            if a not in index:
                return -1
            m |= 1 << index[a]
        return m

    compiled = []
    for r in rules:
        if r.head not in index:
            continue
        pos, neg = mask(r.pos), mask(r.neg)
        if pos < 0:
            continue  # a positive atom outside the universe can never hold
        compiled.append((1 << index[r.head], pos, max(neg, 0)))

    models = []
    for m in range(1 << len(atoms)):
        reduct = [(h, p) for h, p, n in compiled if not n & m]
        least = 0
        changed = True
        while changed:
            changed = False
            for h, p in reduct:
                if not least & h and p & least == p:
                    least |= h
                    changed = True
        if least == m:
            models.append(frozenset(a for a, i in index.items() if m >> i & 1))
    return StableModelReport(models, atoms)


def stable_models(registry, kb: KnowledgeBase, atom_cap: int = DEFAULT_ATOM_CAP,
                  options: Optional[EvalOptions] = None) -> StableModelReport:
    g = ground(registry, kb, atom_cap, options)
    return enumerate_stable_models(g.rules, g.atoms)


def oracle_held_sets(registry, kb: KnowledgeBase, atom_cap: int = DEFAULT_ATOM_CAP,
                     options: Optional[EvalOptions] = None) -> tuple[StableModelReport, list[set]]:
    """Stable models widened with the facts that hold independently of the rules."""
    g = ground(registry, kb, atom_cap, options)
    report = enumerate_stable_models(g.rules, g.atoms)
    return report, [set(m) | g.fixed_true for m in report.models]
