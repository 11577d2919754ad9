"""Ground instances, three-valued truth and the layered knowledge base."""

from __future__ import annotations

import enum
from typing import Iterable, NamedTuple, Optional, Union

from .errors import ArityMismatch

Literal = Union[int, str]


class Instance(NamedTuple):
    """A ground value of a declared type.

    Primitive types carry one literal argument; product types carry one
    ``Instance`` per field; Bool types carry none.
    """

    type: str
    args: tuple

    def __str__(self) -> str:
        return render_instance(self)


class TruthValue(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    @classmethod
    def of(cls, flag: bool) -> "TruthValue":
        return cls.TRUE if flag else cls.FALSE


def literal_key(v: Literal) -> tuple:
    return (0, v) if isinstance(v, int) else (1, v)


def value_key(v) -> tuple:
    """Canonical order: numbers, then strings, then instances (by type, then args)."""
    if isinstance(v, Instance):
        return (2, v.type, tuple(value_key(a) for a in v.args))
    if isinstance(v, bool):
        return (3, v)
    return literal_key(v)


def canonical(instances: Iterable[Instance]) -> list[Instance]:
    return sorted(instances, key=value_key)


def render_literal(v: Literal) -> str:
    from .syntax.printer import render_string

    return str(v) if isinstance(v, int) else render_string(v)


def _render_arg(v) -> str:
    if isinstance(v, Instance):
        if len(v.args) == 1 and not isinstance(v.args[0], Instance):
            return render_literal(v.args[0])
        return render_instance(v)
    return render_literal(v)


def render_instance(inst: Instance) -> str:
    return f"{inst.type}({', '.join(_render_arg(a) for a in inst.args)})"


class KnowledgeBase:
    """Immutable layered map from instances to truth values.

    Layers are indexed per type name; writers return new snapshots that share
    the untouched per-type tables with the original.
    """

    __slots__ = ("additional", "asserted", "derived")

    def __init__(self, additional=None, asserted=None, derived=None):
        self.additional: dict[str, dict[Instance, bool]] = additional or {}
        self.asserted: dict[str, dict[Instance, TruthValue]] = asserted or {}
        self.derived: dict[str, frozenset[Instance]] = derived or {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        strip = lambda d: {k: v for k, v in d.items() if v}
        return (strip(self.additional) == strip(other.additional)
                and strip(self.asserted) == strip(other.asserted)
                and strip(self.derived) == strip(other.derived))

    __hash__ = None  # type: ignore[assignment]

    # -- layer updates ----------------------------------------------------------

    def with_additional(self, entries: Iterable[tuple[Instance, bool]]) -> "KnowledgeBase":
        layer: dict[str, dict[Instance, bool]] = {}
        for inst, value in entries:
            layer.setdefault(inst.type, {})[inst] = bool(value)
        return KnowledgeBase(layer, self.asserted, self.derived)

    def without_additional(self) -> "KnowledgeBase":
        return KnowledgeBase({}, self.asserted, self.derived)

    def with_derived(self, derived: dict[str, frozenset]) -> "KnowledgeBase":
        return KnowledgeBase(self.additional, self.asserted, derived)

    def has_additional_for(self, type_name: str) -> bool:
        return bool(self.additional.get(type_name))

    def _write(self, writes: dict[Instance, TruthValue]) -> "KnowledgeBase":
        asserted = dict(self.asserted)
        touched: set[str] = set()
        for inst, value in writes.items():
            if inst.type not in touched:
                asserted[inst.type] = dict(asserted.get(inst.type, {}))
                touched.add(inst.type)
            asserted[inst.type][inst] = value
        return KnowledgeBase(self.additional, asserted, self.derived)

    def asserted_true(self, type_name: str) -> list[Instance]:
        return [i for i, v in self.asserted.get(type_name, {}).items() if v is TruthValue.TRUE]

    def all_derived(self) -> set[Instance]:
        out: set[Instance] = set()
        for s in self.derived.values():
            out |= s
        return out


def truth_of(kb: KnowledgeBase, registry, inst: Instance) -> TruthValue:
    rec = registry.get(inst.type)
    layer = kb.additional.get(inst.type)
    if layer and inst in layer:
        return TruthValue.of(layer[inst])
    layer = kb.asserted.get(inst.type)
    if layer and inst in layer:
        value = layer[inst]
        if value is TruthValue.UNKNOWN and not rec.is_open:
            return TruthValue.FALSE
        return value
    if inst in kb.derived.get(inst.type, ()):
        return TruthValue.TRUE
    return TruthValue.UNKNOWN if rec.is_open else TruthValue.FALSE


def true_instances(kb: KnowledgeBase, registry, type_name: str) -> list[Instance]:
    """Instances of a type whose truth is True, in canonical order."""
    candidates = set(kb.additional.get(type_name, {}))
    candidates.update(kb.asserted.get(type_name, {}))
    candidates.update(kb.derived.get(type_name, ()))
    return canonical(i for i in candidates if truth_of(kb, registry, i) is TruthValue.TRUE)


def held_instances(kb: KnowledgeBase, registry, type_name: str) -> list[Instance]:
    """Enumeration of a type: the full domain when finite, else the true instances."""
    if registry.is_finite(type_name):
        return list(registry.domain_of(type_name).instances)
    return true_instances(kb, registry, type_name)


def check_arity(registry, inst: Instance) -> None:
    rec = registry.get(inst.type)
    expected = 1 if rec.is_primitive else len(rec.fields)
    if len(inst.args) != expected:
        raise ArityMismatch(f"{inst.type} takes {expected} argument(s), got {len(inst.args)}")


def _displaced(kb: KnowledgeBase, registry, inst: Instance, function_displacement: bool) -> list[Instance]:
    rec = registry.get(inst.type)
    if rec.is_var:
        return [i for i in kb.asserted_true(inst.type) if i != inst]
    if rec.is_function and function_displacement and len(inst.args) > 1:
        key = inst.args[:-1]
        return [i for i in kb.asserted_true(inst.type) if i != inst and i.args[:-1] == key]
    return []


def assert_instance(kb: KnowledgeBase, registry, inst: Instance, value: TruthValue,
                    function_displacement: bool = True) -> KnowledgeBase:
    """Write one instance into the asserted layer, displacing Var/Function rivals."""
    check_arity(registry, inst)
    writes = {}
    if value is TruthValue.TRUE:
        for other in _displaced(kb, registry, inst, function_displacement):
            writes[other] = TruthValue.FALSE
    writes[inst] = value
    return kb._write(writes)


def apply_effects(kb: KnowledgeBase, registry, created: Iterable[Instance],
                  terminated: Iterable[Instance] = (), obfuscated: Iterable[Instance] = (),
                  function_displacement: bool = True) -> KnowledgeBase:
    """Apply simultaneous effects; creation beats termination beats obfuscation."""
    created = set(created)
    terminated = set(terminated) - created
    obfuscated = set(obfuscated) - created - terminated
    writes: dict[Instance, TruthValue] = {}
    for inst in created:
        check_arity(registry, inst)
        for other in _displaced(kb, registry, inst, function_displacement):
            if other not in created:
                writes[other] = TruthValue.FALSE
    for inst in canonical(obfuscated):
        writes[inst] = TruthValue.UNKNOWN
    for inst in canonical(terminated):
        writes[inst] = TruthValue.FALSE
    for inst in canonical(created):
        writes[inst] = TruthValue.TRUE
    return kb._write(writes)


def held_set(kb: KnowledgeBase, registry, types: Optional[Iterable[str]] = None) -> set[Instance]:
    """Every instance currently True (restricted to the given types if any)."""
    names = list(types) if types is not None else set(kb.additional) | set(kb.asserted) | set(kb.derived)
    out: set[Instance] = set()
    for name in names:
        if name in registry:
            out.update(true_instances(kb, registry, name))
    return out
