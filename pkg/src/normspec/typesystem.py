"""Type registry: declarations, domains, field resolution and Extend bookkeeping."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from .errors import (DuplicateFieldName, DutyMissingHolderClaimant, ExtendUnknownType,
                     TypeSystemError, UnknownType, UnresolvableField)
from .knowledge import Instance, literal_key
from .syntax import ast as A

CLAUSE_KINDS = tuple(A.CLAUSE_KEYWORDS)
_ALIAS_SUFFIX = re.compile(r"[0-9']+$")


@dataclass(frozen=True, eq=False)
class TypeRecord:
    name: str
    kind: str  # Fact | Act | Event | Duty
    is_open: bool = False
    is_var: bool = False
    is_function: bool = False
    is_bool: bool = False
    is_physical: bool = False
    # primitive domains: "String" | "Int" | "literals"; product domains: "product"
    domain: str = "String"
    literals: tuple = ()
    fields: tuple[str, ...] = ()  # field labels, in order; types are resolved by the registry
    clauses: dict = field(default_factory=dict)  # clause kind -> tuple of expressions

    @property
    def is_primitive(self) -> bool:
        return self.domain != "product"

    @property
    def is_action(self) -> bool:
        return self.kind in ("Act", "Event")

    def clause(self, kind: str) -> tuple:
        return self.clauses.get(kind, ())

    @property
    def has_rules(self) -> bool:
        return bool(self.clauses.get("derived_from") or self.clauses.get("holds_when"))


def _builtin(name: str, domain: str) -> TypeRecord:
    return TypeRecord(name=name, kind="Fact", domain=domain)


BUILTINS = (_builtin("int", "Int"), _builtin("string", "String"), _builtin("actor", "String"))


@dataclass(frozen=True)
class Finite:
    instances: tuple


@dataclass(frozen=True)
class InfinitePrimitive:
    base: str  # String | Int


@dataclass(frozen=True)
class Product:
    field_types: tuple[str, ...]


Domain = Union[Finite, InfinitePrimitive, Product]


class Registry:
    """Immutable snapshot mapping type names to records."""

    _counter = itertools.count()

    def __init__(self, types: dict[str, TypeRecord], order: tuple[str, ...]):
        self._types = dict(types)
        self.order = order
        self.version = next(Registry._counter)
        self._field_types: dict[str, tuple] = {}
        self._domains: dict[str, Domain] = {}

    @classmethod
    def initial(cls) -> "Registry":
        return cls({r.name: r for r in BUILTINS}, tuple(r.name for r in BUILTINS))

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def __iter__(self):
        return (self._types[n] for n in self.order)

    def get(self, name: str) -> TypeRecord:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownType(f"unknown type: {name}") from None

    def resolve_name(self, name: str) -> Optional[str]:
        """Map a variable or field label to its type: exact name first, then alias stripping."""
        if name in self._types:
            return name
        base = _ALIAS_SUFFIX.sub("", name)
        if base and base in self._types:
            return base
        return None

    def field_types(self, name: str) -> tuple[tuple[str, str], ...]:
        """(label, type name) pairs of a product type."""
        cached = self._field_types.get(name)
        if cached is not None:
            return cached
        rec = self.get(name)
        out = []
        for label in rec.fields:
            t = self.resolve_name(label)
            if t is None:
                raise UnresolvableField(f"field {label!r} of {name} does not name a type")
            out.append((label, t))
        result = tuple(out)
        self._field_types[name] = result
        return result

    def field_index(self, name: str, label: str) -> Optional[int]:
        rec = self.get(name)
        try:
            return rec.fields.index(label)
        except ValueError:
            return None

    def is_finite(self, name: str, _seen: frozenset = frozenset()) -> bool:
        rec = self.get(name)
        if rec.is_primitive:
            return rec.domain == "literals"
        if name in _seen:
            return False
        return all(self.is_finite(t, _seen | {name}) for _, t in self.field_types(name))

    def domain_of(self, name: str) -> Domain:
        cached = self._domains.get(name)
        if cached is not None:
            return cached
        rec = self.get(name)
        if rec.is_primitive:
            if rec.domain == "literals":
                dom: Domain = Finite(tuple(Instance(name, (v,)) for v in rec.literals))
            else:
                dom = InfinitePrimitive(rec.domain)
        elif self.is_finite(name):
            parts = [self.domain_of(t).instances for _, t in self.field_types(name)]
            dom = Finite(tuple(Instance(name, tuple(combo)) for combo in itertools.product(*parts)))
        else:
            dom = Product(tuple(t for _, t in self.field_types(name)))
        self._domains[name] = dom
        return dom

    def open_types(self) -> list[TypeRecord]:
        return [r for r in self if r.is_open]


def _fields_of(decl: A.TypeDecl) -> tuple[str, tuple, tuple[str, ...]]:
    """Work out (domain kind, literals, field labels) from a declaration's domain clauses."""
    roles: dict[str, str] = {}
    related: list[str] = []
    identified: Optional[A.IdentifiedBy] = None
    literals: Optional[tuple] = None
    for dc in decl.domain:
        if isinstance(dc, A.IdentifiedBy):
            identified = dc
        elif isinstance(dc, A.DomainLits):
            literals = tuple(sorted(set(dc.values), key=literal_key))
        elif isinstance(dc, A.RelatedTo):
            related.extend(dc.fields)
        else:
            roles[dc.role] = dc.field

    if literals is not None:
        if identified is not None and identified.kind == "fields":
            raise TypeSystemError(f"{decl.name}: Domain requires a primitive type")
        return "literals", literals, ()
    if identified is not None and identified.kind == "range":
        return "literals", tuple(range(identified.low, identified.high + 1)), ()
    if identified is not None and identified.kind in ("String", "Int"):
        return identified.kind, (), ()

    labels: list[str] = []
    if decl.kind == "Act":
        labels.append(roles.get("Actor", "actor"))
        if "Recipient" in roles:
            labels.append(roles["Recipient"])
    elif decl.kind == "Duty":
        if "Holder" not in roles or "Claimant" not in roles:
            raise DutyMissingHolderClaimant(f"duty {decl.name} needs Holder and Claimant")
        labels += [roles["Holder"], roles["Claimant"]]
    if identified is not None:
        labels.extend(identified.fields)
    labels.extend(related)
    if not labels and decl.kind == "Fact" and "Bool" not in decl.modifiers:
        return "String", (), ()
    if len(set(labels)) != len(labels):
        dup = next(l for l in labels if labels.count(l) > 1)
        raise DuplicateFieldName(f"{decl.name}: duplicate field {dup!r}")
    return "product", (), tuple(labels)


def record_from_decl(decl: A.TypeDecl) -> TypeRecord:
    domain, literals, labels = _fields_of(decl)
    mods = decl.modifiers
    clauses: dict[str, tuple] = {}
    for c in decl.clauses:
        clauses[c.kind] = clauses.get(c.kind, ()) + c.exprs
    return TypeRecord(
        name=decl.name, kind=decl.kind, is_open="Open" in mods, is_var="Var" in mods,
        is_function="Function" in mods, is_bool="Bool" in mods, is_physical="Physical" in mods,
        domain=domain, literals=literals, fields=labels, clauses=clauses)


def apply_declarations(registry: Registry, decls: Union[A.Decls, Iterable[A.TypeDecl]]) -> Registry:
    """Install a declaration sequence simultaneously, returning a new snapshot.

    Fresh declarations replace any prior record of the same name (dropping its
    extensions); Extend declarations append clauses and are applied after all
    fresh declarations of the sequence.
    """
    items = decls.decls if isinstance(decls, A.Decls) else tuple(decls)
    types = dict(registry._types)
    order = list(registry.order)
    for d in items:
        if d.is_extend:
            continue
        types[d.name] = record_from_decl(d)
        if d.name not in order:
            order.append(d.name)
    for d in items:
        if not d.is_extend:
            continue
        if d.name not in types:
            raise ExtendUnknownType(f"cannot extend undeclared type {d.name}")
        if d.domain:
            raise TypeSystemError(f"Extend of {d.name} cannot change its domain")
        rec = types[d.name]
        clauses = dict(rec.clauses)
        for c in d.clauses:
            clauses[c.kind] = clauses.get(c.kind, ()) + c.exprs
        is_open = rec.is_open
        if "Open" in d.modifiers:
            is_open = True
        elif "Closed" in d.modifiers:
            is_open = False
        types[d.name] = replace(rec, clauses=clauses, is_open=is_open)
    return Registry(types, tuple(order))
