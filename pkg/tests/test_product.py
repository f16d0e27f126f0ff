import numpy as np
import pytest

from pomcheck.domains import build_gridworld, build_rocksample, default_rock_positions
from pomcheck.errors import PropositionMismatch
from pomcheck.ltl import parse_ltl
from pomcheck.mec import max_reachability_mdp
from pomcheck.model import TabularPomdp, validate
from pomcheck.product import attach_reachability, build_product, success_states
from pomcheck.rabin import ltl_to_dra

from oracles import brute_force_mecs
from test_mec import random_mdp


def trivial_model():
    return TabularPomdp(
        num_states=1,
        num_actions=1,
        num_observations=1,
        transition={(0, 0): [(0, 1.0)]},
        observation=np.ones((1, 1, 1)),
        initial_belief=np.array([1.0]),
        labels={0: frozenset({"p"})},
    )


def test_trivial_product_shape():
    d = ltl_to_dra(parse_ltl("true"))
    p = build_product(trivial_model(), d, strict=False)
    # one live pair plus sink and post-success terminal
    assert p.num_states == 3
    assert p.pairs == [(0, 0)]
    assert validate(p.pomdp) == []


def test_proposition_mismatch():
    d = ltl_to_dra(parse_ltl("G !q"))
    with pytest.raises(PropositionMismatch) as err:
        build_product(trivial_model(), d)
    assert "q" in str(err.value)


def test_marginalization_on_gridworld_product():
    model = build_gridworld(4)
    d = ltl_to_dra(parse_ltl("!C U A & !C U B"))
    p = build_product(model, d)
    index = {pair: i for i, pair in enumerate(p.pairs)}
    for i, (s, q) in enumerate(p.pairs):
        q2 = d.delta[q][d.letter_mask(model.label_of(s))]
        for a in range(model.num_actions):
            base_row = dict(model.transition[(s, a)])
            prod_row = dict(p.pomdp.transition[(i, a)])
            # all successors share the unique automaton successor
            for s2, prob in base_row.items():
                assert prod_row[index[(s2, q2)]] == prob
            assert abs(sum(prod_row.values()) - 1.0) < 1e-12


def test_product_initial_belief_pairs_with_q0():
    model = build_gridworld(3)
    d = ltl_to_dra(parse_ltl("!C U A & !C U B"))
    p = build_product(model, d)
    b0 = p.pomdp.initial_belief
    assert abs(b0.sum() - 1.0) < 1e-12
    for i in np.flatnonzero(b0):
        assert p.pairs[i][1] == d.initial


def test_observation_inherited_and_artificial_rows():
    model = build_gridworld(3)
    d = ltl_to_dra(parse_ltl("G !C"))
    p = build_product(model, d)
    for i, (s, _q) in enumerate(p.pairs):
        assert np.array_equal(p.pomdp.observation[:, i, :], model.observation[:, s, :])
    assert np.allclose(p.pomdp.observation[:, p.sink, :], 1.0 / model.num_observations)


def test_gridworld_gnotc_has_no_success_states():
    model = build_gridworld(5)  # C is the center cell
    d = ltl_to_dra(parse_ltl("G !C"))
    p = build_product(model, d)
    succ = success_states(p)
    live_grid = {
        i
        for i in succ
        if p.pairs[i][0] not in model.terminal_states
    }
    assert live_grid == set()


def test_all_accepting_dra_success_everywhere_in_mecs():
    model = build_gridworld(3)
    d = ltl_to_dra(parse_ltl("true"))
    p = build_product(model, d, strict=False)
    succ = success_states(p)
    # the slippery grid is one big MEC; every live pair is a success state
    assert succ == frozenset(range(len(p.pairs)))


def test_attach_reachability_structure():
    model = build_rocksample(4, default_rock_positions(4, 2))
    d = ltl_to_dra(parse_ltl("G !bad"))
    p = attach_reachability(build_product(model, d))
    assert p.success
    for i in p.success:
        for a in range(p.pomdp.num_actions):
            assert p.pomdp.transition[(i, a)] == ((p.post_terminal, 1.0),)
        assert p.pomdp.reward[i].tolist() == [1.0] * p.pomdp.num_actions
    # success states have underlying max-reachability value one
    v = max_reachability_mdp(p.pomdp, p.success)
    assert all(v[i] == 1.0 for i in p.success)
    assert p.fail is not None and p.sink in p.fail


def test_success_monotone_in_acceptance_pairs():
    model = build_gridworld(3)
    d = ltl_to_dra(parse_ltl("!C U A & !C U B"))
    p = build_product(model, d)
    base = success_states(p, d)
    import copy

    d2 = copy.deepcopy(d)
    d2.acc_pairs = d.acc_pairs + [(frozenset(), frozenset(range(d.num_states)))]
    more = success_states(p, d2)
    assert base <= more


def test_success_states_match_brute_force_on_random_products():
    rng = np.random.default_rng(5)
    formulas = ["G !a", "F b", "!a U b", "G F a", "F G b", "G !a & F b"]
    for trial in range(12):
        m = random_mdp(rng, int(rng.integers(2, 5)), int(rng.integers(1, 3)))
        labels = {}
        for s in range(m.num_states):
            props = set()
            if rng.random() < 0.4:
                props.add("a")
            if rng.random() < 0.4:
                props.add("b")
            if props:
                labels[s] = frozenset(props)
        m = TabularPomdp(
            num_states=m.num_states,
            num_actions=m.num_actions,
            num_observations=1,
            transition=dict(m.transition),
            observation=np.ones((m.num_actions, m.num_states, 1)),
            initial_belief=m.initial_belief,
            labels=labels,
        )
        f = formulas[trial % len(formulas)]
        d = ltl_to_dra(parse_ltl(f))
        p = build_product(m, d, strict=False)
        got = success_states(p)

        live = list(range(len(p.pairs)))
        successors = {
            (i, a): {s2 for s2, prob in p.pomdp.transition[(i, a)] if prob > 0}
            for i in live
            for a in range(p.pomdp.num_actions)
        }
        expected = set()
        for r in range(1, len(live) + 1):
            import itertools

            for subset in itertools.combinations(live, r):
                sub = frozenset(subset)
                restricted = {
                    k: v for k, v in successors.items() if k[0] in sub
                }
                ecs = brute_force_mecs(p.pomdp.num_states, restricted)
                for states, _acts in ecs:
                    if states != sub:
                        continue
                    qs = {p.pairs[i][1] for i in states}
                    for l_i, k_i in d.acc_pairs:
                        if not qs & l_i and qs & k_i:
                            expected.update(states)
        assert got == frozenset(expected), (f, trial)
