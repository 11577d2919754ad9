"""Expression evaluation over a knowledge-base snapshot.

Expressions are first *expanded* (constructor applications get their missing
arguments filled in with variable references, free variables are collected)
and then compiled into closures ``fn(env, ctx)``.  Every compiled node knows
its static polarity (+1 positive, -1 negative, 0 non-monotone); the context
uses it only when derivation runs an alternating fixpoint over a stratum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import (ArityMismatch, DivisionByZero, EmptyAggregate, EvalError, NotAnAction,
                     OpenEnumeration, TypeMismatch, UnknownField, UnknownInstance, UnknownType)
from .knowledge import (Instance, KnowledgeBase, TruthValue, canonical, true_instances, truth_of,
                        value_key)
from .syntax import ast as A

NEG_INF = float("-inf")
POS_INF = float("inf")
INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1


class _Nothing:
    """Result of ``e When g`` when the guard fails; dropped by enumerations."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOTHING"


NOTHING = _Nothing()


class NonMonotoneLookup(Exception):
    """A stratum under alternating evaluation was consulted in a non-monotone position."""

    def __init__(self, type_name: str):
        super().__init__(type_name)
        self.type_name = type_name


@dataclass
class EvalOptions:
    empty_aggregate: str = "sentinel"  # or "error"
    function_displacement: bool = True


Compiled = Callable[[dict, "Context"], object]


class Context:
    """A knowledge-base snapshot together with the registry it is typed by."""

    def __init__(self, registry, kb: KnowledgeBase, options: Optional[EvalOptions] = None):
        self.registry = registry
        self.kb = kb
        self.kb_neg = kb
        self.alt_types: frozenset[str] = frozenset()
        self.options = options or EvalOptions()
        self.compiler = compiler_for(registry)
        self._enum_cache: dict[tuple[str, int], list] = {}

    def alternating(self, types, kb_pos: KnowledgeBase, kb_neg: KnowledgeBase) -> "Context":
        ctx = Context(self.registry, kb_pos, self.options)
        ctx.kb_neg = kb_neg
        ctx.alt_types = frozenset(types)
        return ctx

    def _kb_for(self, type_name: str, pol: int) -> KnowledgeBase:
        if type_name in self.alt_types:
            if pol == 0:
                raise NonMonotoneLookup(type_name)
            return self.kb if pol > 0 else self.kb_neg
        return self.kb

    def truth(self, inst: Instance, pol: int = 1) -> TruthValue:
        return truth_of(self._kb_for(inst.type, pol), self.registry, inst)

    def is_true(self, inst: Instance, pol: int = 1) -> bool:
        t = self.truth(inst, pol)
        if t is TruthValue.UNKNOWN:
            raise UnknownInstance(inst)
        return t is TruthValue.TRUE

    def enumerate(self, type_name: str, pol: int = 1) -> list:
        reg = self.registry
        if reg.is_finite(type_name):
            return reg.domain_of(type_name).instances
        side = pol if type_name in self.alt_types else 1
        key = (type_name, side)
        cached = self._enum_cache.get(key)
        if cached is not None:
            return cached
        kb = self._kb_for(type_name, pol)
        if reg.get(type_name).is_open and not kb.has_additional_for(type_name):
            raise OpenEnumeration(type_name)
        result = true_instances(kb, reg, type_name)
        self._enum_cache[key] = result
        return result

    # -- instance-level predicates ------------------------------------------------

    def env_for(self, inst: Instance) -> dict:
        rec = self.registry.get(inst.type)
        if rec.is_primitive:
            return {inst.type: inst}
        return dict(zip(rec.fields, inst.args))

    def holds(self, inst: Instance, pol: int = 1) -> bool:
        rec = self.registry.get(inst.type)
        if holds_by_default(rec):
            kb = self._kb_for(inst.type, pol)
            explicit = inst in kb.additional.get(inst.type, {}) or inst in kb.asserted.get(inst.type, {})
            return not explicit or self.is_true(inst, pol)
        return self.is_true(inst, pol)

    def conditions_hold(self, inst: Instance, pol: int = 1) -> bool:
        env = self.env_for(inst)
        for fn in self.compiler.conditions(inst.type, pol):
            if not to_bool(fn(env, self), self, pol):
                return False
        return True

    def enabled(self, inst: Instance, pol: int = 1) -> bool:
        return self.holds(inst, pol) and self.conditions_hold(inst, pol)

    def violated_indices(self, inst: Instance, pol: int = 1) -> list[int]:
        """Indices of the satisfied violation conditions of a duty (empty unless it holds)."""
        if not self.is_true(inst, pol):
            return []
        env = self.env_for(inst)
        return [i for i, fn in enumerate(self.compiler.violations(inst.type, pol))
                if to_bool(fn(env, self), self, pol)]


def holds_by_default(rec) -> bool:
    """Physical acts and rule-less events hold unless explicitly terminated."""
    if rec.is_physical:
        return True
    return rec.kind == "Event" and not rec.has_rules


# -- value helpers --------------------------------------------------------------


def unwrap(v):
    """Primitive instances compare and compute by their underlying literal."""
    if isinstance(v, Instance) and len(v.args) == 1 and not isinstance(v.args[0], Instance):
        return v.args[0]
    return v


def to_bool(v, ctx: Context, pol: int) -> bool:
    if v is True or v is False:
        return v
    if v is NOTHING:
        return False
    if isinstance(v, Instance):
        return ctx.is_true(v, pol)
    if isinstance(v, list):
        return any(to_bool(x, ctx, pol) for x in v)
    raise TypeMismatch(f"expected a Boolean, got {render_value(v)}")


def witness(v, ctx: Context, pol: int) -> bool:
    """Truth of a quantifier body: a defined number or string counts as a witness."""
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        return True
    return to_bool(v, ctx, pol)


def render_value(v) -> str:
    if isinstance(v, Instance):
        return str(v)
    if isinstance(v, list):
        return "[" + ", ".join(render_value(x) for x in v) + "]"
    if v is True or v is False:
        return "True" if v else "False"
    if isinstance(v, float):
        return "-inf" if v < 0 else "+inf"
    if isinstance(v, str):
        from .knowledge import render_literal

        return render_literal(v)
    return repr(v) if v is NOTHING else str(v)


def coerce(v, target: str, registry) -> Instance:
    """Convert a value into an instance of ``target``."""
    if isinstance(v, Instance) and v.type == target:
        return v
    rec = registry.get(target)
    if isinstance(v, float):
        raise EvalError(f"cannot store an infinite aggregate result in {target}")
    if v is True or v is False or v is NOTHING or isinstance(v, list):
        raise TypeMismatch(f"cannot convert {render_value(v)} into {target}")
    if rec.is_primitive:
        lit = unwrap(v)
        if isinstance(lit, Instance):
            raise TypeMismatch(f"cannot convert {v} into primitive type {target}")
        if rec.domain == "Int" and not isinstance(lit, int):
            raise TypeMismatch(f"{target} expects an integer, got {render_value(lit)}")
        if rec.domain == "String" and not isinstance(lit, str):
            raise TypeMismatch(f"{target} expects a string, got {render_value(lit)}")
        if rec.domain == "literals" and lit not in rec.literals:
            raise TypeMismatch(f"{render_value(lit)} is not in the domain of {target}")
        return Instance(target, (lit,))
    if isinstance(v, Instance) and not registry.get(v.type).is_primitive:
        src_fields = registry.get(v.type).fields
        args = []
        for label, ftype in registry.field_types(target):
            if label not in src_fields:
                raise TypeMismatch(f"cannot convert {v} into {target}: no field {label!r}")
            args.append(coerce(v.args[src_fields.index(label)], ftype, registry))
        return Instance(target, tuple(args))
    raise TypeMismatch(f"cannot convert {render_value(v)} into {target}")


def _check_int(r):
    if isinstance(r, int) and not INT_MIN <= r <= INT_MAX:
        raise EvalError("integer overflow")
    return r


def _arith(op: str, a, b):
    a, b = unwrap(a), unwrap(b)
    if not isinstance(a, (int, float)) or not isinstance(b, (int, float)) or isinstance(a, bool) \
            or isinstance(b, bool):
        raise TypeMismatch(f"arithmetic on non-numbers: {render_value(a)} {op} {render_value(b)}")
    if op == "+":
        return _check_int(a + b)
    if op == "-":
        return _check_int(a - b)
    if op == "*":
        return _check_int(a * b)
    if b == 0:
        raise DivisionByZero("division by zero")
    if isinstance(a, int) and isinstance(b, int):
        q = abs(a) // abs(b)
        return _check_int(q if (a >= 0) == (b >= 0) else -q)
    return a / b


def _compare(op: str, a, b) -> bool:
    a, b = unwrap(a), unwrap(b)
    if op == "==":
        return a == b and type(a) is type(b) or (_numeric(a) and _numeric(b) and a == b)
    if op == "!=":
        return not _compare("==", a, b)
    if not ((_numeric(a) and _numeric(b)) or (isinstance(a, str) and isinstance(b, str))):
        raise TypeMismatch(f"cannot order {render_value(a)} and {render_value(b)}")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _numeric(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _elements(v) -> list:
    if isinstance(v, list):
        return v
    return [] if v is NOTHING else [v]


# -- expansion --------------------------------------------------------------------


class Expander:
    """Fills in implicit constructor arguments and collects free variables."""

    def __init__(self, registry):
        self.registry = registry

    def expand(self, e: A.Expr, bound: frozenset) -> tuple[A.Expr, list[str]]:
        free: list[str] = []
        out = self._go(e, bound, free)
        return out, free

    def _add(self, free: list, name: str) -> None:
        if name not in free:
            free.append(name)

    def _go(self, e, bound, free):
        if isinstance(e, A.Ref):
            if e.name not in bound:
                self._add(free, e.name)
            return e
        if isinstance(e, A.App):
            return self._app(e, bound, free)
        if isinstance(e, A.Quant):
            body = self._go(e.body, bound | set(e.vars), inner := [])
            for n in inner:
                if n not in e.vars:
                    self._add(free, n)
            return A.Quant(e.kind, e.vars, body)
        if isinstance(e, A.Proj):
            return A.Proj(self._go(e.expr, bound, free), e.field)
        if isinstance(e, A.BinOp):
            return A.BinOp(e.op, self._go(e.left, bound, free), self._go(e.right, bound, free))
        if isinstance(e, (A.Not, A.Holds, A.Enabled, A.Violated)):
            return type(e)(self._go(e.expr, bound, free))
        if isinstance(e, A.Agg):
            return A.Agg(e.kind, self._go(e.body, bound, free))
        if isinstance(e, A.When):
            return A.When(self._go(e.expr, bound, free), self._go(e.guard, bound, free), e.keyword)
        return e

    def _app(self, e: A.App, bound, free):
        reg = self.registry
        if e.name not in reg:
            raise UnknownType(f"unknown type: {e.name}")
        rec = reg.get(e.name)
        if rec.is_primitive:
            if not e.args:
                return self._go(A.Ref(e.name), bound, free)
            if len(e.args) != 1:
                raise ArityMismatch(f"{e.name} takes one argument, got {len(e.args)}")
            a = e.args[0]
            if a.name is not None and a.name != e.name:
                raise UnknownField(f"{e.name} has no field {a.name!r}")
            return A.App(e.name, (A.Arg(e.name, self._go(a.expr, bound, free)),))
        labels = rec.fields
        given: dict[str, A.Expr] = {}
        positional = [a for a in e.args if a.name is None]
        if len(positional) > len(labels):
            raise ArityMismatch(f"{e.name} takes {len(labels)} argument(s), got {len(positional)}")
        for label, a in zip(labels, positional):
            given[label] = a.expr
        for a in e.args:
            if a.name is None:
                continue
            if a.name not in labels:
                raise UnknownField(f"{e.name} has no field {a.name!r}")
            given[a.name] = a.expr
        if labels and not given and not any(l in bound for l in labels):
            return self._go(A.Ref(e.name), bound, free)
        args = []
        for label in labels:
            expr = given.get(label, A.Ref(label))
            args.append(A.Arg(label, self._go(expr, bound, free)))
        return A.App(e.name, tuple(args))


# -- compilation ------------------------------------------------------------------


class Compiler:
    """Compiles expanded expressions to closures; caches per registry snapshot."""

    def __init__(self, registry):
        self.registry = registry
        self.expander = Expander(registry)
        self._cache: dict = {}

    def var_type(self, name: str) -> str:
        t = self.registry.resolve_name(name)
        if t is None:
            raise UnknownType(f"{name!r} is neither bound nor the name of a type")
        return t

    # entry points -----------------------------------------------------------

    def clause(self, e: A.Expr, bound: frozenset, implicit: str, pol: int = 1) -> Compiled:
        """Compile a clause-level expression; free variables get an outer quantifier."""
        key = ("clause", id(e), bound, implicit, pol)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        expanded, free = self.expander.expand(e, bound)
        if free:
            for n in free:
                self.var_type(n)
            expanded = A.Quant(implicit, tuple(free), expanded)
        fn = self.compile(expanded, pol)
        self._cache[key] = (e, fn)
        return fn

    def holds_when(self, type_name: str, e: A.Expr) -> Compiled:
        """``Holds when e`` as ``Foreach fields: T(fields) When e``."""
        key = ("holds", id(e), type_name)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        rec = self.registry.get(type_name)
        labels = (type_name,) if rec.is_primitive else rec.fields
        if rec.is_primitive:
            head: A.Expr = A.Ref(type_name)
        else:
            head = A.App(type_name, tuple(A.Arg(l, A.Ref(l)) for l in labels))
        guard, free = self.expander.expand(e, frozenset(labels))
        for n in free:
            self.var_type(n)
        vars_ = tuple(labels) + tuple(n for n in free if n not in labels)
        expanded = A.When(head, guard) if not vars_ else A.Quant("Foreach", vars_, A.When(head, guard))
        fn = self.compile(expanded, 1)
        self._cache[key] = (e, fn)
        return fn

    def _bound_fields(self, type_name: str) -> frozenset:
        rec = self.registry.get(type_name)
        return frozenset((type_name,) if rec.is_primitive else rec.fields)

    def conditions(self, type_name: str, pol: int = 1) -> list[Compiled]:
        rec = self.registry.get(type_name)
        bound = self._bound_fields(type_name)
        return [self.clause(e, bound, "Exists", pol) for e in rec.clause("conditioned_by")]

    def violations(self, type_name: str, pol: int = 1) -> list[Compiled]:
        rec = self.registry.get(type_name)
        bound = self._bound_fields(type_name)
        return [self.clause(e, bound, "Exists", pol) for e in rec.clause("violated_when")]

    def effects(self, type_name: str, kind: str) -> list[Compiled]:
        rec = self.registry.get(type_name)
        bound = self._bound_fields(type_name)
        return [self.clause(e, bound, "Foreach") for e in rec.clause(kind)]

    # node compilation ---------------------------------------------------------

    def compile(self, e: A.Expr, pol: int) -> Compiled:
        method = getattr(self, "_c_" + type(e).__name__)
        return method(e, pol)

    def _c_IntLit(self, e, pol):
        v = e.value
        return lambda env, ctx: v

    _c_StrLit = _c_IntLit
    _c_BoolLit = _c_IntLit

    def _c_Ref(self, e, pol):
        name = e.name

        def ref(env, ctx):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound variable {name}") from None
        return ref

    def _c_App(self, e, pol):
        reg = self.registry
        name = e.name
        rec = reg.get(name)
        if rec.is_primitive:
            field_types = [name]
        else:
            field_types = [t for _, t in reg.field_types(name)]
        arg_fns = [self.compile(a.expr, 0) for a in e.args]
        pairs = list(zip(arg_fns, field_types))

        def app(env, ctx):
            if rec.is_primitive:
                v = arg_fns[0](env, ctx)
                if v is NOTHING:
                    return NOTHING
                return coerce(v, name, reg)
            args = []
            for fn, ftype in pairs:
                v = fn(env, ctx)
                if v is NOTHING:
                    return NOTHING
                args.append(coerce(v, ftype, reg))
            return Instance(name, tuple(args))
        return app

    def _c_Proj(self, e, pol):
        inner = self.compile(e.expr, 0)
        label = e.field
        reg = self.registry

        def proj(env, ctx):
            v = inner(env, ctx)
            if v is NOTHING:
                return NOTHING
            if not isinstance(v, Instance):
                raise TypeMismatch(f"cannot project .{label} from {render_value(v)}")
            idx = reg.field_index(v.type, label)
            if idx is None:
                raise UnknownField(f"{v.type} has no field {label!r}")
            return v.args[idx]
        return proj

    def _c_BinOp(self, e, pol):
        op = e.op
        if op in ("&&", "||"):
            left, right = self.compile(e.left, pol), self.compile(e.right, pol)
            if op == "&&":
                return lambda env, ctx: to_bool(left(env, ctx), ctx, pol) and to_bool(right(env, ctx), ctx, pol)
            return lambda env, ctx: to_bool(left(env, ctx), ctx, pol) or to_bool(right(env, ctx), ctx, pol)
        left, right = self.compile(e.left, 0), self.compile(e.right, 0)
        if op in A.COMPARE_OPS:
            def cmp(env, ctx):
                a = left(env, ctx)
                b = right(env, ctx)
                if a is NOTHING or b is NOTHING:
                    return NOTHING
                return _compare(op, a, b)
            return cmp

        def arith(env, ctx):
            a = left(env, ctx)
            b = right(env, ctx)
            if a is NOTHING or b is NOTHING:
                return NOTHING
            return _arith(op, a, b)
        return arith

    def _c_Not(self, e, pol):
        inner = self.compile(e.expr, -pol)
        return lambda env, ctx: not to_bool(inner(env, ctx), ctx, -pol)

    def _c_Holds(self, e, pol):
        inner = self.compile(e.expr, pol)

        def holds(env, ctx):
            v = inner(env, ctx)
            if v is NOTHING:
                return False
            if isinstance(v, list):
                return any(ctx.is_true(x, pol) for x in v)
            if not isinstance(v, Instance):
                raise TypeMismatch(f"Holds expects an instance, got {render_value(v)}")
            return ctx.holds(v, pol)
        return holds

    def _c_Enabled(self, e, pol):
        inner = self.compile(e.expr, 0)
        reg = self.registry

        def enabled(env, ctx):
            out = False
            for v in _elements(inner(env, ctx)):
                if not isinstance(v, Instance):
                    raise TypeMismatch(f"Enabled expects an instance, got {render_value(v)}")
                if not reg.get(v.type).is_action:
                    raise NotAnAction(f"{v.type} is not an act or event type")
                # Enabled is not monotone in its argument's type
                out = out or ctx.enabled(v, 0 if ctx.alt_types else 1)
            return out
        return enabled

    def _c_Violated(self, e, pol):
        inner = self.compile(e.expr, 0)

        def violated(env, ctx):
            p = 0 if ctx.alt_types else 1
            return any(bool(ctx.violated_indices(v, p)) for v in _elements(inner(env, ctx))
                       if isinstance(v, Instance))
        return violated

    def _c_Quant(self, e, pol):
        vars_ = e.vars
        types = [self.var_type(v) for v in vars_]
        kind = e.kind
        dom_pol = -pol if kind == "Forall" else pol
        if kind == "Forall" and isinstance(e.body, A.When):
            # elements whose guard fails are vacuously satisfied: the guard is negative
            val = self.compile(e.body.expr, pol)
            guard = self.compile(e.body.guard, -pol)

            def body(env, ctx):
                if not to_bool(guard(env, ctx), ctx, -pol):
                    return NOTHING
                return val(env, ctx)
        else:
            body = self.compile(e.body, pol)

        def loop(env, ctx, step):
            """Bind the variables to every combination; stop early if ``step`` says so."""
            domains = [ctx.enumerate(t, dom_pol) for t in types]
            saved = [env.get(v, NOTHING) for v in vars_]
            try:
                for combo in itertools.product(*domains):
                    for v, value in zip(vars_, combo):
                        env[v] = value
                    if step(body(env, ctx)):
                        return True
                return False
            finally:
                for v, old in zip(vars_, saved):
                    if old is NOTHING:
                        env.pop(v, None)
                    else:
                        env[v] = old

        if kind == "Exists":
            return lambda env, ctx: loop(
                env, ctx, lambda r: r is not NOTHING and witness(r, ctx, pol))
        if kind == "Forall":
            return lambda env, ctx: not loop(
                env, ctx, lambda r: r is not NOTHING and not witness(r, ctx, pol))

        def foreach(env, ctx):
            out = set()

            def collect(r):
                if r is NOTHING:
                    pass
                elif isinstance(r, list):
                    out.update(r)
                else:
                    out.add(r)
                return False
            loop(env, ctx, collect)
            return sorted(out, key=value_key)
        return foreach

    def _c_Agg(self, e, pol):
        inner = self.compile(e.body, 0)
        kind = e.kind

        def agg(env, ctx):
            items = _elements(inner(env, ctx))
            if kind == "Count":
                return len(items)
            nums = []
            for x in items:
                x = unwrap(x)
                if not _numeric(x):
                    raise TypeMismatch(f"{kind} over non-number {render_value(x)}")
                nums.append(x)
            if kind == "Sum":
                return _check_int(sum(nums))
            if not nums:
                if ctx.options.empty_aggregate == "error":
                    raise EmptyAggregate(f"{kind} over an empty enumeration")
                return NEG_INF if kind == "Max" else POS_INF
            return max(nums) if kind == "Max" else min(nums)
        return agg

    def _c_When(self, e, pol):
        val = self.compile(e.expr, pol)
        guard = self.compile(e.guard, pol)

        def when(env, ctx):
            if to_bool(guard(env, ctx), ctx, pol):
                return val(env, ctx)
            return NOTHING
        return when


def compiler_for(registry) -> Compiler:
    comp = getattr(registry, "_compiler", None)
    if comp is None:
        comp = Compiler(registry)
        registry._compiler = comp
    return comp


# -- public operations --------------------------------------------------------------


def eval_expr(expr: A.Expr, ctx: Context, env: Optional[dict] = None, implicit: str = "Foreach"):
    """Evaluate an expression; free variables are bound by an outer ``implicit`` quantifier."""
    env = dict(env or {})
    fn = ctx.compiler.clause(expr, frozenset(env), implicit)
    return fn(env, ctx)


def eval_bool(expr: A.Expr, ctx: Context, env: Optional[dict] = None) -> bool:
    env = dict(env or {})
    fn = ctx.compiler.clause(expr, frozenset(env), "Exists")
    return to_bool(fn(env, ctx), ctx, 1)


def eval_instances(expr: A.Expr, ctx: Context, env: Optional[dict] = None) -> list:
    """All values an expression denotes, deduplicated and in canonical order."""
    return canonical(set(_elements(eval_expr(expr, ctx, env, "Foreach"))))


def complete_constructor(registry, type_name: str, args: tuple = (), bound=frozenset()) -> A.Expr:
    """Constructor application with its implicit arguments made explicit."""
    expanded, _ = Expander(registry).expand(A.App(type_name, tuple(args)), frozenset(bound))
    return expanded


def holds_true(inst: Instance, kb: KnowledgeBase, registry) -> TruthValue:
    return truth_of(kb, registry, inst)


def enabled(inst: Instance, kb: KnowledgeBase, registry, options: Optional[EvalOptions] = None) -> bool:
    return Context(registry, kb, options).enabled(inst)


def derive_type(ctx: Context, type_name: str) -> set[Instance]:
    """Instances produced by one pass over the derivation clauses of a type."""
    reg = ctx.registry
    rec = reg.get(type_name)
    comp = ctx.compiler
    produced: set[Instance] = set()
    for e in rec.clause("derived_from"):
        for v in _elements(comp.clause(e, frozenset(), "Foreach")({}, ctx)):
            produced.add(coerce(v, type_name, reg))
    for e in rec.clause("holds_when"):
        for v in _elements(comp.holds_when(type_name, e)({}, ctx)):
            produced.add(coerce(v, type_name, reg))
    if rec.clause("conditioned_by"):
        produced = {i for i in produced if ctx.conditions_hold(i)}
    return produced
