import json
import re

import pytest

from normspec.asp_export import FRAME_RULES, Mangler, SearchSpec, emit_search, emit_specification
from normspec.errors import EmptyCriterion, OpenInfiniteEnumeration
from normspec.knowledge import Instance
from normspec.typesystem import Registry

from support import CORPUS, base_state, corpus_text, run_text

CONTROLS_RULES = [
    'in((derived,controls(user("Admin"),dataset(A))),S) :- state(S) ; not 0 < #count{ user(B) : #true ,'
    'not user(B) = user("Admin") ,in((holds,controls(user(B),dataset(A))),S) ,in((enum,user(B)),S) } ; '
    'in((enum,dataset(A)),S).',
    "in((enum,controls(user(A),dataset(B))),S) :- state(S) ; in((holds,controls(user(A),dataset(B))),S).",
    "in((holds,I),S) :- in((derived,I),S) ;\n    not in((suppressed,I),S) ; not in((terminated,I),S).",
]


def squash(text: str) -> str:
    return re.sub(r"\s+", "", text)


def registry_of(relpath):
    return base_state(corpus_text(relpath))[0]


def search_spec() -> SearchSpec:
    raw = json.loads((CORPUS / "asp" / "search.json").read_text())
    return SearchSpec(raw["breadth"], raw["depth"], raw["root_facts"], raw["root_triggers"], raw["criterion"])


@pytest.mark.parametrize("rule", CONTROLS_RULES)
def test_controls_translation_contains_rule(rule):
    assert squash(rule) in squash(emit_specification(registry_of("asp/controls.eflint")))


def test_holds_frame_rule_is_verbatim():
    assert "in((holds,I),S) :- in((derived,I),S)" in emit_specification(registry_of("asp/controls.eflint"))


def test_empty_registry_emits_only_frame_rules():
    text = emit_specification(Registry.initial())
    rules = [line for line in text.splitlines() if line and not line.startswith("%")]
    assert FRAME_RULES[0] in rules
    assert all(line.startswith("in((") for line in rules)
    assert "derived" not in text.replace(FRAME_RULES[0], "")


def test_emission_is_deterministic():
    reg = registry_of("asp/controls.eflint")
    assert emit_specification(reg) == emit_specification(reg)


def test_open_infinite_enumeration_is_rejected():
    reg, _ = base_state("""Open Fact user Identified by String.
Fact count Identified by Int Derived from Count(Foreach user: user).""")
    with pytest.raises(OpenInfiniteEnumeration):
        emit_specification(reg)


def test_mangling_is_injective_and_tabulated():
    m = Mangler(["min-price-of", "min_price_of", "bid'", "Alice"])
    assert m("min-price-of") == "min_price_of"
    assert m("min_price_of") == "min_price_of_2"
    assert m("bid'") == "bid_p"
    assert m("Alice") == "t_Alice"
    assert len(set(m.forward.values())) == 4
    assert "% name min_price_of_2 = min_price_of" in m.table()


def auction_registry():
    session, _ = run_text(corpus_text("golden/auction.eflint"))
    return session.state.registry


def test_search_sections_in_order():
    text = emit_search(auction_registry(), search_spec())
    heads = [line for line in text.splitlines() if line in ("% breadth", "% depth", "% root", "% criterion")]
    assert heads == ["% breadth", "% depth", "% root", "% criterion"]


def test_auction_search():
    text = emit_search(auction_registry(), search_spec())
    assert ("1 = { choose(I,S) : in((enabled,I), S), I = raise_hand(Actor) } "
            ":- state(S); state(S + 1).") in text
    assert "{ state(S) } :- S = 1..1000." in text
    assert "state(S) :- 1 <= S ; state(S + 1)." in text
    assert 'in((create,bidder("Amy")),1).' in text
    assert 'in((trigger,start_bidding(object("Vase"))),1).' in text
    assert ":- counterexample." in text
    assert "X != Y" in text


def test_minimal_search():
    text = emit_search(Registry.initial(), SearchSpec("tick(Actor)", 1, criterion=["in((holds,done),S)"]))
    assert "{ state(S) } :- S = 1..1." in text
    assert "in((create," not in text and "in((trigger,t" not in text


def test_root_instances_are_rendered_ground():
    spec = SearchSpec("tick(Actor)", 2, [Instance("min-price-of", (Instance("object", ("Vase",)), 200))],
                      criterion=["x"])
    assert 'in((create,min_price_of(object("Vase"),200)),1).' in emit_search(Registry.initial(), spec)


def test_empty_criterion():
    with pytest.raises(EmptyCriterion):
        emit_search(Registry.initial(), SearchSpec("tick(Actor)", 3))
