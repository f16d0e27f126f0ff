import pytest

from pomcheck import ltl
from pomcheck.errors import EmptyCycle, UnsupportedFragment
from pomcheck.ltl import parse_ltl
from pomcheck.rabin import dra_accepts, ltl_to_dra

from oracles import all_lassos, eval_lasso

# formulas exercised in the benchmark domains plus the figure example
CORPUS = [
    "!C U A & !C U B",
    "G !C",
    "!det U B",
    "G !bad",
    "F good & F exit",
    "F good & F exit & G !bad",
    "G !A & F B",
    "G F A",
]


def test_fig2_automaton_shape():
    d = ltl_to_dra(parse_ltl("G !A & F B"))
    # two live states plus the rejecting sink
    assert d.num_states == 3
    # staying forever in the B-seen state is accepting
    assert dra_accepts(d, [frozenset()], [frozenset({"B"})])
    assert not dra_accepts(d, [], [frozenset({"A"})])
    assert not dra_accepts(d, [], [frozenset()])


def test_false_formula_single_rejecting_sink():
    d = ltl_to_dra(ltl.FALSE)
    assert d.num_states == 1
    assert not dra_accepts(d, [], [frozenset()])


def test_true_formula_all_accepting():
    d = ltl_to_dra(ltl.TRUE)
    assert d.num_states == 1
    assert dra_accepts(d, [], [frozenset()])


def test_unsupported_fragment_raises():
    with pytest.raises(UnsupportedFragment) as err:
        ltl_to_dra(parse_ltl("F A U G B"))
    assert "hoa" in str(err.value).lower()


def test_empty_cycle_rejected():
    d = ltl_to_dra(parse_ltl("G F A"))
    with pytest.raises(EmptyCycle):
        dra_accepts(d, [frozenset()], [])


def test_completeness_and_determinism():
    for text in CORPUS:
        d = ltl_to_dra(parse_ltl(text))
        d.validate()
        d2 = ltl_to_dra(parse_ltl(text))
        assert d.delta == d2.delta and d.acc_pairs == d2.acc_pairs


@pytest.mark.parametrize("text", CORPUS)
def test_language_matches_semantic_evaluator(text):
    f = parse_ltl(text)
    d = ltl_to_dra(f)
    props = tuple(sorted(ltl.atoms(f)))
    for prefix, cycle in all_lassos(props, 3, 2):
        expected = eval_lasso(f, prefix, cycle)
        assert dra_accepts(d, prefix, cycle) == expected, (text, prefix, cycle)


def test_until_order_free_visits():
    d = ltl_to_dra(parse_ltl("!C U A & !C U B"))
    A, B, C, N = frozenset("A"), frozenset("B"), frozenset("C"), frozenset()
    assert dra_accepts(d, [A, B], [N])
    assert dra_accepts(d, [B, N, A], [N])
    assert not dra_accepts(d, [A, C, B], [N])
    assert not dra_accepts(d, [C], [frozenset("AB")])
    assert dra_accepts(d, [frozenset("AB")], [C])  # C after both is fine


def test_multi_recurrence_counter():
    f = parse_ltl("G F A & G F B")
    d = ltl_to_dra(f)
    for prefix, cycle in all_lassos(("A", "B"), 2, 3):
        assert dra_accepts(d, prefix, cycle) == eval_lasso(f, prefix, cycle)


def test_mixed_recurrence_persistence_safety():
    f = parse_ltl("G F A & F G B")
    d = ltl_to_dra(f)
    for prefix, cycle in all_lassos(("A", "B"), 2, 3):
        assert dra_accepts(d, prefix, cycle) == eval_lasso(f, prefix, cycle)
