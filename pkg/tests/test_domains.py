import numpy as np
import pytest

from pomcheck.domains import (
    OBS_BAD,
    OBS_GOOD,
    OBS_NOT_VISIBLE,
    build_drone,
    build_gridworld,
    build_rocksample,
    default_rock_positions,
)
from pomcheck.errors import LabelOutOfRange, RockOffGrid
from pomcheck.model import validate


def test_gridworld_table_sizes():
    m = build_gridworld(10)
    assert (m.num_states, m.num_actions, m.num_observations) == (101, 4, 101)


def test_gridworld_deterministic_when_slip_one():
    m = build_gridworld(2, slip=1.0)
    # moving right from (0,0) reaches (1,0) with probability 1
    assert m.transition[(0, 1)] == ((1, 1.0),)


def test_gridworld_validates_and_observation_rows_sum():
    m = build_gridworld(3)
    assert validate(m) == []
    assert np.allclose(m.observation.sum(axis=2), 1.0)


def test_gridworld_observation_support_is_chebyshev_ball():
    m = build_gridworld(3)
    center = 4  # (1,1)
    support = np.flatnonzero(m.observation[0, center])
    assert sorted(support) == list(range(9))
    corner = 0  # (0,0)
    support = np.flatnonzero(m.observation[0, corner])
    assert sorted(support) == [0, 1, 3, 4]
    assert np.allclose(m.observation[0, corner, support], 0.25)


def test_gridworld_label_out_of_range():
    with pytest.raises(LabelOutOfRange):
        build_gridworld(3, label_cells={"A": {(3, 0)}})


def test_gridworld_wall_self_loop():
    m = build_gridworld(3, slip=0.7)
    # moving left from (0,0): intended blocked -> self-loop keeps 0.7
    row = dict(m.transition[(0, 0)])
    assert row[0] >= 0.7


def test_rocksample_table_sizes():
    m = build_rocksample(4, default_rock_positions(4, 2))
    assert (m.num_states, m.num_actions, m.num_observations) == (65, 7, 3)
    m = build_rocksample(5, default_rock_positions(5, 3))
    assert (m.num_states, m.num_actions, m.num_observations) == (201, 8, 3)


def test_rocksample_77_size():
    m = build_rocksample(7, default_rock_positions(7, 8))
    assert (m.num_states, m.num_actions, m.num_observations) == (12545, 13, 3)


def test_rocksample_validates():
    m = build_rocksample(4, [(1, 1), (2, 3)])
    assert validate(m) == []


def test_rocksample_check_at_distance_zero_is_exact():
    m = build_rocksample(4, [(1, 1), (2, 3)], sensor_efficiency=5.0)
    # rover on rock 0 at (1,1) with rock 0 good (bit 0 set)
    s = (1 * 4 + 1) * 4 + 0b01
    assert m.observation[5, s, OBS_GOOD] == 1.0
    s_bad = (1 * 4 + 1) * 4 + 0b10
    assert m.observation[5, s_bad, OBS_BAD] == 1.0


def test_rocksample_labels_track_status():
    m = build_rocksample(4, [(1, 1), (2, 3)])
    on_rock0 = (1 * 4 + 1) * 4
    assert m.labels[on_rock0 + 0b01] == frozenset({"good"})
    assert m.labels[on_rock0 + 0b10] == frozenset({"bad"})
    exit_state = 64
    assert m.labels[exit_state] == frozenset({"exit"})
    assert m.terminal_states == frozenset({exit_state})


def test_rocksample_sampling_collects_good_rock():
    m = build_rocksample(4, [(1, 1), (2, 3)])
    s = (1 * 4 + 1) * 4 + 0b11
    assert m.transition[(s, 4)] == (((1 * 4 + 1) * 4 + 0b10, 1.0),)
    # sampling a bad rock leaves the state unchanged
    s_bad = (1 * 4 + 1) * 4 + 0b10
    assert m.transition[(s_bad, 4)] == ((s_bad, 1.0),)


def test_rocksample_east_exit():
    m = build_rocksample(4, [(1, 1), (2, 3)])
    s = (2 * 4 + 3) * 4 + 0b00  # rover at (3,2)
    assert m.transition[(s, 1)] == ((64, 1.0),)


def test_rocksample_rock_off_grid():
    with pytest.raises(RockOffGrid):
        build_rocksample(4, [(4, 0)])


def test_drone_table_sizes():
    m = build_drone(5)
    assert (m.num_states, m.num_actions, m.num_observations) == (626, 5, 10)
    m7 = build_drone(7)
    assert m7.num_states == 2402


def test_drone_validates():
    assert validate(build_drone(3)) == []
    assert validate(build_drone(5)) == []


def test_drone_adjacent_agent_is_visible():
    n = 5
    m = build_drone(n)
    d = 2 * n + 2
    g = 2 * n + 3  # one step right of the drone
    s = d * n * n + g
    assert m.observation[0, s, (1 + 1) + 3 * (0 + 1)] == 1.0


def test_drone_far_agent_not_visible():
    n = 5
    m = build_drone(n)
    s = (0) * n * n + (4 * n + 4)
    assert m.observation[0, s, OBS_NOT_VISIBLE] == 1.0


def test_drone_initial_belief_excludes_field_of_view():
    n = 5
    m = build_drone(n)
    support = np.flatnonzero(m.initial_belief)
    assert len(support) == 21
    fov_cells = {0, 1, n, n + 1}
    for s in support:
        assert s // (n * n) == 0  # drone at A
        assert s % (n * n) not in fov_cells
    assert np.allclose(m.initial_belief[support], 1 / 21)


def test_drone_detection_and_b_end_episode():
    n = 3
    m = build_drone(n)
    terminal = n**4
    det_state = (1 * n + 1) * n * n + (1 * n + 1)
    b_state = (2 * n + 2) * n * n + 0
    for a in range(5):
        assert m.transition[(det_state, a)] == ((terminal, 1.0),)
        assert m.transition[(b_state, a)] == ((terminal, 1.0),)
    assert "det" in m.labels[det_state]
    assert "B" in m.labels[b_state]


def test_default_rock_positions_distinct_and_on_grid():
    for n, k in [(4, 2), (5, 3), (7, 8), (6, 4), (8, 5)]:
        rocks = default_rock_positions(n, k)
        assert len(rocks) == len(set(rocks)) == k
        assert all(0 <= x < n and 0 <= y < n for x, y in rocks)
