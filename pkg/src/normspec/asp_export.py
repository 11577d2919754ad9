"""ASP text generation (clingo dialect) for specifications and scenario searches.

Instances are tagged with the state they are relevant in: ``in((tag,instance),S)``.
Derivation, enumeration and the holds frame rule form the core translation.
Effects, syncs, violations and the inertia rules are marked as extrapolated
in the emitted comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import EmptyCriterion, OpenInfiniteEnumeration, UnsupportedExpression
from .evaluator import Expander
from .knowledge import Instance
from .syntax import ast as A

FRAME_RULES = (
    "in((holds,I),S) :- in((derived,I),S) ; not in((suppressed,I),S) ; not in((terminated,I),S).",
)

EXTRAPOLATED_FRAME_RULES = (
    "in((holds,I),S) :- in((create,I),S) ; not in((terminated,I),S).",
    "in((create,I),S+1) :- in((create,I),S) ; state(S+1) ; not in((terminate,I),S+1).",
    "in((terminated,I),S) :- in((terminate,I),S) ; not in((create,I),S).",
    "in((terminated,I),S+1) :- in((terminated,I),S) ; state(S+1) ; not in((create,I),S+1).",
    "in((enabled,I),S) :- in((holds,I),S) ; not in((suppressed,I),S).",
    "in((violated,I),S) :- in((trigger,I),S) ; not in((enabled,I),S).",
)

BUILTIN_NAMES = ("int", "string", "actor")


@dataclass(frozen=True)
class AspRule:
    head: str
    body: tuple[str, ...] = ()
    kind: str = "rule"  # fact | rule | choice | integrity

    def render(self) -> str:
        if self.kind == "integrity":
            return ":- " + " ; ".join(self.body) + "."
        if not self.body:
            return self.head + "."
        return self.head + " :- " + " ; ".join(self.body) + "."


# -- names ------------------------------------------------------------------------


class Mangler:
    """Injective mapping from type names to clingo identifiers."""

    def __init__(self, names):
        self.forward: dict[str, str] = {}
        used: set[str] = set()
        for name in names:
            base = re.sub(r"[^A-Za-z0-9_]", "_", name.replace("'", "_p"))
            if not base[0].islower():
                base = "t_" + base
            candidate, k = base, 1
            while candidate in used:
                k += 1
                candidate = f"{base}_{k}"
            used.add(candidate)
            self.forward[name] = candidate

    def __call__(self, name: str) -> str:
        return self.forward.get(name) or Mangler([name]).forward[name]

    def table(self) -> list[str]:
        return [f"% name {asp} = {name}" for name, asp in self.forward.items() if asp != name]


def render_literal(v) -> str:
    if isinstance(v, int):
        return str(v)
    return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_ground(inst: Instance, mangle: Mangler) -> str:
    parts = []
    for a in inst.args:
        parts.append(render_ground(a, mangle) if isinstance(a, Instance) else render_literal(a))
    return f"{mangle(inst.type)}({','.join(parts)})"


# -- terms ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TPrim:
    type: str
    inner: str  # a variable or a rendered literal


@dataclass(frozen=True)
class TProd:
    type: str
    fields: tuple  # of (label, term)


@dataclass(frozen=True)
class TScalar:
    text: str


Term = Union[TPrim, TProd, TScalar]


class _Vars:
    def __init__(self):
        self.n = 0

    def fresh(self) -> str:
        i = self.n
        self.n += 1
        letter = chr(ord("A") + i % 26)
        return letter if i < 26 else f"{letter}{i // 26}"


class _Rule:
    """Translation state of one emitted rule."""

    def __init__(self, exporter: "AspExporter"):
        self.x = exporter
        self.vars = _Vars()

    def render(self, t: Term) -> str:
        m = self.x.mangle
        if isinstance(t, TPrim):
            return f"{m(t.type)}({t.inner})"
        if isinstance(t, TProd):
            return f"{m(t.type)}({','.join(self.render(f) for _, f in t.fields)})"
        return t.text

    def scalar(self, t: Term) -> str:
        if isinstance(t, TPrim):
            return t.inner
        if isinstance(t, TScalar):
            return t.text
        raise UnsupportedExpression(f"arithmetic on a composite instance of {t.type}")

    def fresh_term(self, type_name: str, _seen=()) -> Term:
        reg = self.x.registry
        rec = reg.get(type_name)
        if rec.is_primitive:
            return TPrim(type_name, self.vars.fresh())
        if type_name in _seen:
            raise UnsupportedExpression(f"recursive product type {type_name}")
        return TProd(type_name, tuple((label, self.fresh_term(t, _seen + (type_name,)))
                                      for label, t in reg.field_types(type_name)))

    def enum_atom(self, t: Term) -> str:
        return f"in((enum,{self.render(t)}),S)"

    def bind(self, vars_, env: dict) -> tuple[dict, list[Term]]:
        env = dict(env)
        terms = []
        for v in vars_:
            t = self.x.registry.resolve_name(v)
            if t is None:
                raise UnsupportedExpression(f"{v!r} does not name a type")
            self.x.require_enum(t)
            term = self.fresh_term(t)
            env[v] = term
            terms.append(term)
        return env, terms

    def coerce(self, t: Term, target: str) -> Term:
        reg = self.x.registry
        if isinstance(t, (TPrim, TProd)) and t.type == target:
            return t
        rec = reg.get(target)
        if rec.is_primitive:
            if isinstance(t, TProd):
                raise UnsupportedExpression(f"cannot convert {t.type} into {target}")
            return TPrim(target, self.scalar(t))
        if isinstance(t, TProd):
            fields = dict(t.fields)
            out = []
            for label, ftype in reg.field_types(target):
                if label not in fields:
                    raise UnsupportedExpression(f"cannot convert {t.type} into {target}")
                out.append((label, self.coerce(fields[label], ftype)))
            return TProd(target, tuple(out))
        raise UnsupportedExpression(f"cannot convert a value into {target}")

    # values ------------------------------------------------------------------------

    def term(self, e: A.Expr, env: dict, body: list) -> Term:
        if isinstance(e, A.IntLit):
            return TScalar(str(e.value))
        if isinstance(e, A.StrLit):
            return TScalar(render_literal(e.value))
        if isinstance(e, A.Ref):
            if e.name not in env:
                raise UnsupportedExpression(f"unbound variable {e.name}")
            return env[e.name]
        if isinstance(e, A.App):
            reg = self.x.registry
            rec = reg.get(e.name)
            if rec.is_primitive:
                return self.coerce(self.term(e.args[0].expr, env, body), e.name)
            fields = []
            for (label, ftype), a in zip(reg.field_types(e.name), e.args):
                fields.append((label, self.coerce(self.term(a.expr, env, body), ftype)))
            return TProd(e.name, tuple(fields))
        if isinstance(e, A.Proj):
            inner = self.term(e.expr, env, body)
            if isinstance(inner, TProd):
                for label, t in inner.fields:
                    if label == e.field:
                        return t
            raise UnsupportedExpression(f"cannot project .{e.field}")
        if isinstance(e, A.BinOp) and e.op in ("+", "-", "*", "/"):
            left = self.scalar(self.term(e.left, env, body))
            right = self.scalar(self.term(e.right, env, body))
            return TScalar(f"({left}{e.op}{right})" if e.op in "+-" else f"{left}{e.op}{right}")
        if isinstance(e, A.Agg):
            v = self.vars.fresh()
            body.append(f"{v} = {self.aggregate(e, env)}")
            return TScalar(v)
        if isinstance(e, A.When):
            self.cond(e.guard, env, body)
            return self.term(e.expr, env, body)
        raise UnsupportedExpression(f"{type(e).__name__} cannot be used as a value in ASP output")

    def aggregate(self, e: A.Agg, env: dict) -> str:
        elems = self.elements(e.body, env)
        parts = []
        for t, conds in elems:
            key = self.render(t)
            if e.kind != "Count":
                key = f"{self.scalar(t)},{key}"
            parts.append(f"{key} : " + " ,".join(["#true"] + conds))
        fn = {"Count": "#count", "Sum": "#sum", "Max": "#max", "Min": "#min"}[e.kind]
        return fn + "{ " + " ; ".join(parts) + " }"

    def elements(self, e: A.Expr, env: dict) -> list[tuple[Term, list[str]]]:
        """Element term and its conditions; a Foreach binds its variables with enumeration atoms last."""
        if isinstance(e, A.Quant) and e.kind == "Foreach":
            env, terms = self.bind(e.vars, env)
            out = []
            for t, conds in self.elements(e.body, env):
                out.append((t, conds + [self.enum_atom(b) for b in terms]))
            return out
        conds: list[str] = []
        t = self.term(e, env, conds)
        return [(t, conds)]

    # conditions ------------------------------------------------------------------

    def cond(self, e: A.Expr, env: dict, body: list, witness: bool = False) -> None:
        if isinstance(e, A.BoolLit):
            body.append("#true" if e.value else "#false")
        elif isinstance(e, A.BinOp) and e.op == "&&":
            self.cond(e.left, env, body)
            self.cond(e.right, env, body)
        elif isinstance(e, A.BinOp) and e.op == "||":
            alts = []
            for i, side in enumerate((e.left, e.right), 1):
                conds: list[str] = []
                self.cond(side, env, conds)
                alts.append(f"{i} : " + " ,".join(["#true"] + conds))
            body.append("0 < #count{ " + " ; ".join(alts) + " }")
        elif isinstance(e, A.BinOp) and e.op in A.COMPARE_OPS:
            left = self.term(e.left, env, body)
            right = self.term(e.right, env, body)
            if isinstance(left, TScalar) or isinstance(right, TScalar) or e.op not in ("==", "!="):
                ls, rs = self.scalar(left), self.scalar(right)
            else:
                ls, rs = self.render(left), self.render(right)
            if e.op == "==":
                body.append(f"{ls} = {rs}")
            elif e.op == "!=":
                body.append(f"not {ls} = {rs}")
            else:
                body.append(f"{ls} {e.op} {rs}")
        elif isinstance(e, A.Not):
            inner: list[str] = []
            self.cond(e.expr, env, inner)
            if len(inner) == 1 and not inner[0].startswith("not "):
                body.append("not " + inner[0])
            else:
                body.append("not 0 < #count{ 1 : " + " ,".join(["#true"] + inner) + " }")
        elif isinstance(e, A.Quant) and e.kind == "Exists":
            body.append("0 < " + self._exists(e.vars, e.body, env))
        elif isinstance(e, A.Quant) and e.kind == "Forall":
            if isinstance(e.body, A.When):
                neg = A.BinOp("&&", e.body.guard, A.Not(e.body.expr))
            else:
                neg = A.Not(e.body)
            body.append("not 0 < " + self._exists(e.vars, neg, env))
        elif isinstance(e, A.Quant):
            raise UnsupportedExpression("a Foreach cannot be used as a condition in ASP output")
        elif isinstance(e, A.When):
            self.cond(e.guard, env, body)
            self.cond(e.expr, env, body, witness)
        elif isinstance(e, (A.Holds, A.Enabled, A.Violated)):
            tag = {A.Holds: "holds", A.Enabled: "enabled", A.Violated: "violated"}[type(e)]
            body.append(f"in(({tag},{self.render(self.term(e.expr, env, body))}),S)")
        elif isinstance(e, (A.IntLit, A.StrLit, A.Agg)) or (isinstance(e, A.BinOp) and e.op in "+-*/"):
            if not witness:
                raise UnsupportedExpression("a number or string cannot be used as a condition")
            self.term(e, env, body)
            body.append("#true")
        else:
            t = self.term(e, env, body)
            if isinstance(t, TScalar):
                if not witness:
                    raise UnsupportedExpression("a number or string cannot be used as a condition")
                body.append("#true")
            else:
                body.append(f"in((holds,{self.render(t)}),S)")

    def _exists(self, vars_, body_expr, env) -> str:
        env, terms = self.bind(vars_, env)
        conds: list[str] = []
        self.cond(body_expr, env, conds, witness=True)
        conds += [self.enum_atom(t) for t in terms]
        key = ",".join(self.render(t) for t in terms) or "1"
        return "#count{ " + key + " : " + " ,".join(["#true"] + conds) + " }"


# -- specification ---------------------------------------------------------------------


class AspExporter:
    def __init__(self, registry):
        self.registry = registry
        self.mangle = Mangler([r.name for r in registry])
        self.expander = Expander(registry)
        self.enum_needed: set[str] = set()

    def require_enum(self, type_name: str) -> None:
        self.enum_needed.add(type_name)

    def _field_env(self, r: _Rule, rec) -> tuple[dict, Term]:
        head = r.fresh_term(rec.name)
        if rec.is_primitive:
            return {rec.name: head}, head
        return dict(head.fields), head

    def derivation_rules(self, rec) -> list[str]:
        out = []
        labels = frozenset((rec.name,) if rec.is_primitive else rec.fields)
        for e in rec.clause("derived_from"):
            r = _Rule(self)
            expanded, free = self.expander.expand(e, frozenset())
            expr = A.Quant("Foreach", tuple(free), expanded) if free else expanded
            for t, conds in r.elements(expr, {}):
                head = r.render(r.coerce(t, rec.name))
                out.append(AspRule(f"in((derived,{head}),S)", tuple(["state(S)"] + conds)).render())
        for e in rec.clause("holds_when"):
            r = _Rule(self)
            guard, free = self.expander.expand(e, labels)
            env, head = self._field_env(r, rec)
            conds: list[str] = []
            env2, terms = r.bind([n for n in free if n not in env], env)
            r.cond(guard, env2, conds)
            fields = [head] if rec.is_primitive else [t for _, t in head.fields]
            for t in fields:
                self.require_enum(t.type)
            conds += [r.enum_atom(t) for t in fields + terms]
            out.append(AspRule(f"in((derived,{r.render(head)}),S)", tuple(["state(S)"] + conds)).render())
        return out

    def enum_rule(self, rec) -> list[str]:
        reg = self.registry
        r = _Rule(self)
        name = self.mangle(rec.name)
        if rec.is_primitive and rec.domain == "literals":
            lits = list(rec.literals)
            if lits and all(isinstance(v, int) for v in lits) and lits == list(range(lits[0], lits[-1] + 1)):
                v = r.vars.fresh()
                return [AspRule(f"in((enum,{name}({v})),S)", ("state(S)", f"{v} = {lits[0]}..{lits[-1]}")).render()]
            return [AspRule(f"in((enum,{name}({render_literal(v)})),S)", ("state(S)",)).render() for v in lits]
        head = r.fresh_term(rec.name)
        if reg.is_finite(rec.name):
            return [AspRule(f"in((enum,{r.render(head)}),S)",
                            tuple(["state(S)"] + [r.enum_atom(t) for _, t in head.fields])).render()]
        if rec.is_open:
            raise OpenInfiniteEnumeration(f"open type {rec.name} has no finite enumeration")
        return [AspRule(f"in((enum,{r.render(head)}),S)",
                        ("state(S)", f"in((holds,{r.render(head)}),S)")).render()]

    def condition_rules(self, rec) -> list[str]:
        out = []
        if not rec.clause("conditioned_by"):
            return out
        labels = frozenset((rec.name,) if rec.is_primitive else rec.fields)
        r = _Rule(self)
        env, head = self._field_env(r, rec)
        inner: list[str] = []
        for e in rec.clause("conditioned_by"):
            expanded, free = self.expander.expand(e, labels)
            expr = A.Quant("Exists", tuple(free), expanded) if free else expanded
            r.cond(expr, env, inner)
        h = r.render(head)
        body = ("state(S)", f"in((derived,{h}),S)", "not 0 < #count{ 1 : " + " ,".join(["#true"] + inner) + " }")
        out.append(AspRule(f"in((suppressed,{h}),S)", body).render())
        return out

    def effect_rules(self, rec) -> list[str]:
        out = []
        labels = frozenset((rec.name,) if rec.is_primitive else rec.fields)
        specs = (("creates", "create", "S+1"), ("terminates", "terminate", "S+1"),
                 ("obfuscates", "obfuscate", "S+1"), ("syncs_with", "trigger", "S"))
        for clause, tag, when in specs:
            for e in rec.clause(clause):
                r = _Rule(self)
                env, head = self._field_env(r, rec)
                expanded, free = self.expander.expand(e, labels)
                expr = A.Quant("Foreach", tuple(free), expanded) if free else expanded
                for t, conds in r.elements(expr, env):
                    body = ["state(S)"] + (["state(S+1)"] if when == "S+1" else [])
                    body += [f"in((trigger,{r.render(head)}),S)"] + conds
                    out.append(AspRule(f"in(({tag},{r.render(t)}),{when})", tuple(body)).render())
        for e in rec.clause("violated_when"):
            r = _Rule(self)
            env, head = self._field_env(r, rec)
            expanded, free = self.expander.expand(e, labels)
            expr = A.Quant("Exists", tuple(free), expanded) if free else expanded
            conds: list[str] = []
            r.cond(expr, env, conds)
            h = r.render(head)
            out.append(AspRule(f"in((violated,{h}),S)", tuple(["state(S)", f"in((holds,{h}),S)"] + conds)).render())
        return out

    def emit(self) -> str:
        sections: list[tuple[str, list[str]]] = []
        user_types = [r for r in self.registry if r.name not in BUILTIN_NAMES]
        per_type = []
        for rec in user_types:
            per_type.append((rec, self.derivation_rules(rec), self.condition_rules(rec), self.effect_rules(rec)))
        for rec in self.registry:
            if rec.name in BUILTIN_NAMES and rec.name not in self.enum_needed:
                continue
            block = []
            derived = next((d for r, d, _, _ in per_type if r is rec), [])
            block += derived
            block += self.enum_rule(rec)
            for r, _, cond, eff in per_type:
                if r is rec:
                    if cond or eff:
                        block.append("% extrapolated: suppression, effects and violations")
                    block += cond + eff
            sections.append((f"% type {rec.name}", block))
        lines = self.mangle.table()
        for head, block in sections:
            lines.append(head)
            lines += block
        lines.append("% frame")
        lines += FRAME_RULES
        lines.append("% extrapolated: inertia, enabledness and disabled-action violations")
        lines += EXTRAPOLATED_FRAME_RULES
        return "\n".join(lines) + "\n"


def emit_specification(registry) -> str:
    """The ASP program for a registry: per-type rules followed by the generic frame rules."""
    return AspExporter(registry).emit()


# -- scenario search ----------------------------------------------------------------------


@dataclass
class SearchSpec:
    breadth: str  # action pattern, e.g. "raise-hand(Actor)"
    depth: int
    root_facts: list = field(default_factory=list)  # Instances or ASP term text
    root_triggers: list = field(default_factory=list)
    criterion: list[str] = field(default_factory=list)  # bodies of counterexample rules


def _pattern(text: str, mangle: Mangler) -> str:
    return re.sub(r"[a-z][A-Za-z0-9'-]*(?=\()", lambda m: mangle(m.group(0)), text)


def emit_search(registry, spec: SearchSpec) -> str:
    """Breadth, depth, root and criterion sections, in that order."""
    if spec.depth < 1:
        raise ValueError("search depth must be at least 1")
    if not spec.criterion:
        raise EmptyCriterion("a search needs at least one counterexample rule")
    mangle = Mangler([r.name for r in registry])

    def term(x) -> str:
        return render_ground(x, mangle) if isinstance(x, Instance) else _pattern(str(x), mangle)

    lines = ["% breadth",
             f"1 = {{ choose(I,S) : in((enabled,I), S), I = {_pattern(spec.breadth, mangle)} }} "
             ":- state(S); state(S + 1).",
             "in((trigger,I), S) :- choose(I,S).",
             "% depth",
             f"{{ state(S) }} :- S = 1..{spec.depth}.",
             "state(S) :- 1 <= S ; state(S + 1).",
             "% root"]
    lines += [f"in((create,{term(f)}),1)." for f in spec.root_facts]
    lines += [f"in((trigger,{term(t)}),1)." for t in spec.root_triggers]
    lines.append("% criterion")
    lines.append(":- counterexample.")
    lines += [f"counterexample :- {body.strip().rstrip('.')}." for body in spec.criterion]
    return "\n".join(lines) + "\n"
