import pytest

from pomcheck import ltl
from pomcheck.errors import NotComplete, NotDeterministic, UnsupportedAcceptance
from pomcheck.hoa import dra_to_dot, dra_to_hoa, parse_hoa
from pomcheck.ltl import parse_ltl
from pomcheck.rabin import dra_accepts, ltl_to_dra

from oracles import all_lassos, eval_lasso

FIG2_HOA = """\
HOA: v1
States: 3
Start: 0
AP: 2 "A" "B"
acc-name: Rabin 1
Acceptance: 2 (Fin(0) & Inf(1))
--BODY--
State: 0
[!0 & !1] 0
[!0 & 1] 1
[0] 2
State: 1 {1}
[!0] 1
[0] 2
State: 2 {0}
[t] 2
--END--
"""

ALL_ACCEPTING_HOA = """\
HOA: v1
States: 1
Start: 0
AP: 1 "A"
acc-name: Rabin 1
Acceptance: 2 (Fin(0) & Inf(1))
--BODY--
State: 0 {1}
[t] 0
--END--
"""

BUCHI_HOA = """\
HOA: v1
States: 1
Start: 0
AP: 1 "A"
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[t] 0
--END--
"""


def lasso_equivalent(d1, d2, props, max_prefix=3, max_cycle=2):
    for prefix, cycle in all_lassos(props, max_prefix, max_cycle):
        if dra_accepts(d1, prefix, cycle) != dra_accepts(d2, prefix, cycle):
            return False
    return True


def test_fig2_hoa_matches_builtin_construction():
    imported = parse_hoa(FIG2_HOA)
    built = ltl_to_dra(parse_ltl("G !A & F B"))
    assert lasso_equivalent(imported, built, ("A", "B"))


def test_all_accepting_single_state():
    d = parse_hoa(ALL_ACCEPTING_HOA)
    assert d.num_states == 1
    assert dra_accepts(d, [], [frozenset({"A"})])
    assert dra_accepts(d, [frozenset()], [frozenset()])


def test_buchi_acceptance_rejected():
    with pytest.raises(UnsupportedAcceptance):
        parse_hoa(BUCHI_HOA)


def test_incomplete_automaton():
    text = FIG2_HOA.replace("[0] 2\nState: 1", "State: 1").replace("[0] 2\nState: 2", "State: 2")
    with pytest.raises(NotComplete):
        parse_hoa(text)
    d = parse_hoa(text, complete_sink=True)
    assert d.num_states == 4  # sink added
    f = parse_ltl("G !A & F B")
    for prefix, cycle in all_lassos(("A", "B"), 2, 2):
        assert dra_accepts(d, prefix, cycle) == eval_lasso(f, prefix, cycle)


def test_nondeterministic_rejected():
    text = FIG2_HOA.replace("[!0 & 1] 1", "[!0] 1")
    with pytest.raises(NotDeterministic):
        parse_hoa(text)


def test_roundtrip_through_hoa():
    for text in ["!C U A & !C U B", "G !bad", "F good & F exit & G !bad", "G F A"]:
        f = parse_ltl(text)
        d = ltl_to_dra(f)
        d2 = parse_hoa(dra_to_hoa(d))
        assert d2.propositions == d.propositions
        assert lasso_equivalent(d, d2, d.propositions, 2, 2)


def test_dot_output_mentions_states():
    d = ltl_to_dra(parse_ltl("G !A & F B"))
    dot = dra_to_dot(d)
    assert dot.startswith("digraph")
    assert "->" in dot
