import numpy as np
import pytest

from pomcheck.errors import ImpossibleObservation
from pomcheck.model import Belief, TabularPomdp, belief_update, validate


def two_state_model(obs_acc=0.8):
    # identity transitions, symmetric-noise observation of the state
    transition = {
        (0, 0): [(0, 1.0)],
        (1, 0): [(1, 1.0)],
    }
    observation = np.array(
        [[[obs_acc, 1 - obs_acc], [1 - obs_acc, obs_acc]]]
    )
    return TabularPomdp(
        num_states=2,
        num_actions=1,
        num_observations=2,
        transition=transition,
        observation=observation,
        initial_belief=np.array([0.5, 0.5]),
    )


def test_validate_well_formed():
    assert validate(two_state_model()) == []


def test_validate_bad_row_named():
    m = two_state_model()
    bad = TabularPomdp(
        num_states=2,
        num_actions=1,
        num_observations=2,
        transition={(0, 0): [(0, 0.9)], (1, 0): [(1, 1.0)]},
        observation=m.observation,
        initial_belief=m.initial_belief,
    )
    problems = validate(bad)
    assert len(problems) == 1
    assert "s=0" in problems[0] and "0.9" in problems[0]


def test_validate_terminal_not_absorbing():
    m = two_state_model()
    bad = TabularPomdp(
        num_states=2,
        num_actions=1,
        num_observations=2,
        transition={(0, 0): [(1, 1.0)], (1, 0): [(1, 1.0)]},
        observation=m.observation,
        initial_belief=m.initial_belief,
        terminal_states=frozenset({0}),
    )
    assert any("terminal state 0" in p for p in validate(bad))


def test_belief_update_matches_hand_computation():
    m = two_state_model(0.8)
    b = belief_update(m, Belief(np.array([0.5, 0.5])), 0, 0)
    assert np.allclose(b.probs, [0.8, 0.2])


def test_belief_update_deterministic_chain():
    transition = {(0, 0): [(1, 1.0)], (1, 0): [(1, 1.0)]}
    observation = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    m = TabularPomdp(
        num_states=2,
        num_actions=1,
        num_observations=2,
        transition=transition,
        observation=observation,
        initial_belief=np.array([1.0, 0.0]),
    )
    b = belief_update(m, Belief(np.array([1.0, 0.0])), 0, 1)
    assert np.allclose(b.probs, [0.0, 1.0])


def test_belief_update_impossible_observation():
    m = two_state_model(1.0)  # observation reveals the state exactly
    with pytest.raises(ImpossibleObservation):
        belief_update(m, Belief(np.array([1.0, 0.0])), 0, 1)


def test_one_state_model_degenerates_to_identity():
    m = TabularPomdp(
        num_states=1,
        num_actions=1,
        num_observations=1,
        transition={(0, 0): [(0, 1.0)]},
        observation=np.ones((1, 1, 1)),
        initial_belief=np.array([1.0]),
    )
    b = belief_update(m, Belief(np.array([1.0])), 0, 0)
    assert b.probs.tolist() == [1.0]


def random_model(rng, num_states=5, num_actions=3, num_obs=4):
    transition = {}
    for s in range(num_states):
        for a in range(num_actions):
            support = rng.choice(num_states, size=rng.integers(1, 4), replace=False)
            probs = rng.dirichlet(np.ones(len(support)))
            transition[(s, a)] = list(zip(support.tolist(), probs.tolist()))
    observation = rng.dirichlet(np.ones(num_obs), size=(num_actions, num_states))
    initial = rng.dirichlet(np.ones(num_states))
    return TabularPomdp(
        num_states=num_states,
        num_actions=num_actions,
        num_observations=num_obs,
        transition=transition,
        observation=observation,
        initial_belief=initial,
    )


def test_simplex_preservation_random_updates():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 1000:
        m = random_model(rng)
        b = Belief(rng.dirichlet(np.ones(m.num_states)))
        a = int(rng.integers(m.num_actions))
        o = int(rng.integers(m.num_observations))
        try:
            b2 = belief_update(m, b, a, o)
        except ImpossibleObservation:
            continue
        assert b2.probs.min() >= 0
        assert abs(b2.probs.sum() - 1.0) <= 1e-9
        checked += 1
