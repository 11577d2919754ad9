from hypothesis import given, settings
from hypothesis import strategies as st

from normspec.knowledge import (Instance, KnowledgeBase, TruthValue, apply_effects, assert_instance,
                                canonical, held_instances, truth_of, true_instances)
from normspec.syntax import parse_program
from normspec.typesystem import Registry, apply_declarations

SPEC = """
Fact bidder Identified by String.
Fact object Identified by String.
Fact price Identified by Int.
Var display Identified by object.
Function min-price-of Identified by object * price.
Open Fact user Identified by String.
Fact number Identified by 1..5.
Fact count Identified by Int.
"""


def reg():
    r = Registry.initial()
    for p in parse_program(SPEC):
        r = apply_declarations(r, p)
    return r


R = reg()


def s(t, v):
    return Instance(t, (v,))


def obj(v):
    return s("object", v)


def mpo(o, p):
    return Instance("min-price-of", (obj(o), s("price", p)))


def test_asserted_true():
    kb = assert_instance(KnowledgeBase(), R, s("bidder", "Alice"), TruthValue.TRUE)
    assert truth_of(kb, R, s("bidder", "Alice")) is TruthValue.TRUE


def test_closed_default_false_and_open_default_unknown():
    kb = KnowledgeBase()
    assert truth_of(kb, R, s("bidder", "Bob")) is TruthValue.FALSE
    assert truth_of(kb, R, s("user", "Eve")) is TruthValue.UNKNOWN


def test_var_displacement():
    kb = assert_instance(KnowledgeBase(), R, Instance("display", (obj("Watch"),)), TruthValue.TRUE)
    kb = assert_instance(kb, R, Instance("display", (obj("Clock"),)), TruthValue.TRUE)
    assert true_instances(kb, R, "display") == [Instance("display", (obj("Clock"),))]
    assert truth_of(kb, R, Instance("display", (obj("Watch"),))) is TruthValue.FALSE


def test_function_displacement():
    kb = assert_instance(KnowledgeBase(), R, mpo("Watch", 100), TruthValue.TRUE)
    kb = assert_instance(kb, R, mpo("Clock", 200), TruthValue.TRUE)
    kb = assert_instance(kb, R, mpo("Watch", 120), TruthValue.TRUE)
    assert set(true_instances(kb, R, "min-price-of")) == {mpo("Watch", 120), mpo("Clock", 200)}


def test_function_displacement_can_be_disabled():
    kb = assert_instance(KnowledgeBase(), R, mpo("Watch", 100), TruthValue.TRUE)
    kb = assert_instance(kb, R, mpo("Watch", 120), TruthValue.TRUE, function_displacement=False)
    assert len(true_instances(kb, R, "min-price-of")) == 2


def test_obfuscation_gives_unknown_for_open_types():
    kb = assert_instance(KnowledgeBase(), R, s("user", "Amy"), TruthValue.TRUE)
    kb = assert_instance(kb, R, s("user", "Amy"), TruthValue.UNKNOWN)
    assert truth_of(kb, R, s("user", "Amy")) is TruthValue.UNKNOWN


def test_closed_types_never_report_unknown():
    kb = assert_instance(KnowledgeBase(), R, s("bidder", "Amy"), TruthValue.UNKNOWN)
    assert truth_of(kb, R, s("bidder", "Amy")) is TruthValue.FALSE


def test_layer_priority():
    inst = s("bidder", "Amy")
    kb = KnowledgeBase(derived={"bidder": frozenset({inst})})
    assert truth_of(kb, R, inst) is TruthValue.TRUE
    kb = assert_instance(kb, R, inst, TruthValue.FALSE)
    assert truth_of(kb, R, inst) is TruthValue.FALSE
    kb = kb.with_additional([(inst, True)])
    assert truth_of(kb, R, inst) is TruthValue.TRUE
    assert truth_of(kb.without_additional(), R, inst) is TruthValue.FALSE


def test_obfuscated_beats_derived():
    inst = s("user", "Amy")
    kb = KnowledgeBase(derived={"user": frozenset({inst})})
    kb = assert_instance(kb, R, inst, TruthValue.UNKNOWN)
    assert truth_of(kb, R, inst) is TruthValue.UNKNOWN


def test_create_beats_terminate():
    inst = s("bidder", "Amy")
    kb = apply_effects(KnowledgeBase(), R, [inst], [inst])
    assert truth_of(kb, R, inst) is TruthValue.TRUE


def test_held_instances_finite_versus_infinite():
    kb = apply_effects(KnowledgeBase(), R, [s("number", 1), s("number", 3), s("count", 5), s("count", 1)])
    assert [i.args[0] for i in held_instances(kb, R, "number")] == [1, 2, 3, 4, 5]
    assert [i.args[0] for i in held_instances(kb, R, "count")] == [1, 5]
    assert held_instances(KnowledgeBase(), R, "bidder") == []


def test_canonical_order_numbers_before_strings():
    items = [s("x", "b"), s("x", 10), s("x", "a"), s("x", -2)]
    assert [i.args[0] for i in canonical(items)] == [-2, 10, "a", "b"]


def test_rendering():
    assert str(mpo("Watch", 100)) == "min-price-of(Watch, 100)"
    assert str(s("user", "two words")) == 'user("two words")'


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["Watch", "Clock", "Vase"]), st.integers(0, 3),
                          st.sampled_from(["display", "mpo"])), max_size=12))
def test_var_and_function_invariants(ops):
    kb = KnowledgeBase()
    for o, p, kind in ops:
        inst = Instance("display", (obj(o),)) if kind == "display" else mpo(o, p)
        kb = assert_instance(kb, R, inst, TruthValue.TRUE)
    assert len(true_instances(kb, R, "display")) <= 1
    keys = [i.args[0] for i in true_instances(kb, R, "min-price-of")]
    assert len(keys) == len(set(keys))
