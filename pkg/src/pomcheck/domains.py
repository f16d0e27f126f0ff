"""Builders for the three benchmark domains.

Cells are (x, y) with (0, 0) the bottom-left corner; cell index is y*n + x.
Move actions are 0=left, 1=right, 2=down, 3=up throughout.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import LabelOutOfRange, ModelError, RockOffGrid
from .model import TabularPomdp

MOVES = ((-1, 0), (1, 0), (0, -1), (0, 1))  # left, right, down, up


def _cell_index(x: int, y: int, n: int) -> int:
    return y * n + x


def _in_grid(x: int, y: int, n: int) -> bool:
    return 0 <= x < n and 0 <= y < n


# ---------------------------------------------------------------------------
# partially observable grid world


def default_gridworld_labels(n: int) -> dict[str, set[tuple[int, int]]]:
    """Label layout used by the CLI when none is given.

    A and B sit in opposite corners. C is a horizontal barrier across the
    middle row with safe gaps at both ends (a single center cell on small
    grids), so reaching both corners forces a risky crossing.
    """
    a = {(0, 0)}
    b = {(n - 1, n - 1)}
    if n >= 6:
        c = {(x, n // 2) for x in range(2, n - 2)}
    else:
        cx = n // 2
        c = {(cx, cx)} if (cx, cx) not in a | b else {(1, 0)}
    return {"A": a, "B": b, "C": c}


def build_gridworld(
    n: int,
    slip: float = 0.7,
    label_cells: dict[str, set[tuple[int, int]]] | None = None,
) -> TabularPomdp:
    """n x n slippery grid with a noisy position observation.

    A move reaches the intended neighbor with probability `slip` and one of
    the other three neighbors otherwise (uniformly); blocked directions
    self-loop. The observation is uniform over the 3x3 Chebyshev
    neighborhood of the true cell, clipped at the borders; the extra
    absorbing state emits a dedicated observation.
    """
    if n < 2:
        raise ModelError("grid side must be at least 2")
    if not 0.0 < slip <= 1.0:
        raise ModelError("slip probability must be in (0, 1]")
    if label_cells is None:
        label_cells = default_gridworld_labels(n)

    num_cells = n * n
    terminal = num_cells
    num_states = num_cells + 1
    num_actions = 4
    num_obs = num_cells + 1

    transition: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for y in range(n):
        for x in range(n):
            s = _cell_index(x, y, n)
            targets = []
            for dx, dy in MOVES:
                tx, ty = x + dx, y + dy
                targets.append(
                    _cell_index(tx, ty, n) if _in_grid(tx, ty, n) else s
                )
            for a in range(4):
                row: dict[int, float] = {}
                row[targets[a]] = row.get(targets[a], 0.0) + slip
                for other in range(4):
                    if other != a:
                        row[targets[other]] = row.get(targets[other], 0.0) + (1.0 - slip) / 3.0
                transition[(s, a)] = sorted(row.items())
    for a in range(4):
        transition[(terminal, a)] = [(terminal, 1.0)]

    observation = np.zeros((num_actions, num_states, num_obs))
    for y in range(n):
        for x in range(n):
            s = _cell_index(x, y, n)
            nbrs = [
                _cell_index(x + dx, y + dy, n)
                for dx in (-1, 0, 1)
                for dy in (-1, 0, 1)
                if _in_grid(x + dx, y + dy, n)
            ]
            p = 1.0 / len(nbrs)
            for o in nbrs:
                observation[:, s, o] = p
    observation[:, terminal, num_cells] = 1.0

    labels: dict[int, set[str]] = {}
    for prop, cells in label_cells.items():
        for x, y in cells:
            if not _in_grid(x, y, n):
                raise LabelOutOfRange(f"cell {(x, y)} for label {prop!r} outside {n}x{n} grid")
            labels.setdefault(_cell_index(x, y, n), set()).add(prop)

    initial = np.zeros(num_states)
    initial[:num_cells] = 1.0 / num_cells

    return TabularPomdp(
        num_states=num_states,
        num_actions=num_actions,
        num_observations=num_obs,
        transition=transition,
        observation=observation,
        initial_belief=initial,
        discount=1.0,
        labels={s: frozenset(ps) for s, ps in labels.items()},
        terminal_states=frozenset({terminal}),
    )


# ---------------------------------------------------------------------------
# rock sample

OBS_GOOD, OBS_BAD, OBS_NULL = 0, 1, 2


def default_rock_positions(n: int, k: int) -> list[tuple[int, int]]:
    """Deterministic rock layout; the classic instance for the 7x7/8 size."""
    table = {
        (4, 2): [(1, 1), (2, 3)],
        (5, 3): [(1, 1), (3, 3), (2, 4)],
        (7, 8): [(2, 0), (0, 1), (3, 1), (6, 3), (2, 4), (3, 4), (5, 5), (1, 6)],
    }
    if (n, k) in table:
        return table[(n, k)]
    start = (0, n // 2)
    taken = {start}
    out = []
    i = 0
    while len(out) < k:
        x, y = (2 + 3 * i) % n, (1 + 2 * i) % n
        while (x, y) in taken:
            x = (x + 1) % n
            if x == 0:
                y = (y + 1) % n
        taken.add((x, y))
        out.append((x, y))
        i += 1
    return out


def build_rocksample(
    n: int,
    rock_positions: list[tuple[int, int]],
    sensor_efficiency: float = 20.0,
) -> TabularPomdp:
    """Rock sample: deterministic rover, noisy long-range rock sensor.

    State packs (rover cell, rock status bits) with bit i set while rock i
    is good; moving east off the grid enters the absorbing exit state.
    A state where the rover stands on rock i is labeled `good` or `bad`
    according to the rock's current status; the exit state is labeled
    `exit`. Sampling a good rock turns it bad (it has been collected);
    sampling elsewhere is a no-op. Check action 5+i reads rock i's status
    correctly with probability (1 + 2^(-d/d0)) / 2 at distance d.
    """
    k = len(rock_positions)
    rocks = [tuple(p) for p in rock_positions]
    if len(set(rocks)) != k:
        raise ModelError("rock positions must be distinct")
    for x, y in rocks:
        if not _in_grid(x, y, n):
            raise RockOffGrid(f"rock at {(x, y)} outside {n}x{n} grid")
    if sensor_efficiency <= 0:
        raise ModelError("sensor_efficiency must be positive")

    num_bits = 1 << k
    num_cells = n * n
    exit_state = num_cells * num_bits
    num_states = exit_state + 1
    num_actions = 5 + k
    rock_cell = {i: _cell_index(x, y, n) for i, (x, y) in enumerate(rocks)}
    cell_rock = {c: i for i, c in rock_cell.items()}

    def pack(cell: int, bits: int) -> int:
        return cell * num_bits + bits

    transition: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for cell in range(num_cells):
        x, y = cell % n, cell // n
        for bits in range(num_bits):
            s = pack(cell, bits)
            for a, (dx, dy) in enumerate(MOVES):
                tx, ty = x + dx, y + dy
                if a == 1 and tx == n:  # east edge leads to the exit area
                    transition[(s, a)] = [(exit_state, 1.0)]
                elif _in_grid(tx, ty, n):
                    transition[(s, a)] = [(pack(_cell_index(tx, ty, n), bits), 1.0)]
                else:
                    transition[(s, a)] = [(s, 1.0)]
            rock_here = cell_rock.get(cell)
            if rock_here is not None and bits >> rock_here & 1:
                transition[(s, 4)] = [(pack(cell, bits & ~(1 << rock_here)), 1.0)]
            else:
                transition[(s, 4)] = [(s, 1.0)]
            for i in range(k):
                transition[(s, 5 + i)] = [(s, 1.0)]
    for a in range(num_actions):
        transition[(exit_state, a)] = [(exit_state, 1.0)]

    observation = np.zeros((num_actions, num_states, 3))
    observation[:, :, OBS_NULL] = 1.0
    for i in range(k):
        a = 5 + i
        rx, ry = rocks[i]
        for cell in range(num_cells):
            x, y = cell % n, cell // n
            d = math.hypot(x - rx, y - ry)
            eta = (1.0 + 2.0 ** (-d / sensor_efficiency)) / 2.0
            for bits in range(num_bits):
                s = pack(cell, bits)
                good = bool(bits >> i & 1)
                observation[a, s, OBS_GOOD] = eta if good else 1.0 - eta
                observation[a, s, OBS_BAD] = 1.0 - eta if good else eta
                observation[a, s, OBS_NULL] = 0.0

    labels: dict[int, frozenset[str]] = {exit_state: frozenset({"exit"})}
    for i, cell in rock_cell.items():
        for bits in range(num_bits):
            s = pack(cell, bits)
            labels[s] = frozenset({"good" if bits >> i & 1 else "bad"})

    start_cell = _cell_index(0, n // 2, n)
    initial = np.zeros(num_states)
    for bits in range(num_bits):
        initial[pack(start_cell, bits)] = 1.0 / num_bits

    return TabularPomdp(
        num_states=num_states,
        num_actions=num_actions,
        num_observations=3,
        transition=transition,
        observation=observation,
        initial_belief=initial,
        discount=1.0,
        labels=labels,
        terminal_states=frozenset({exit_state}),
    )


# ---------------------------------------------------------------------------
# drone surveillance

OBS_NOT_VISIBLE = 9


def build_drone(n: int) -> TabularPomdp:
    """Drone surveillance: deterministic drone, randomly walking ground agent.

    State packs (drone cell, agent cell). The drone sees the agent only
    inside the 3x3 field of view centered on itself (one observation per
    relative cell, plus "not visible"). Corners are labeled A (bottom-left,
    the start) and B (top-right); co-location is labeled det. States
    labeled B or det move to the absorbing terminal under every action.
    """
    if n < 3:
        raise ModelError("drone grid side must be at least 3")
    num_cells = n * n
    terminal = num_cells * num_cells
    num_states = terminal + 1
    num_actions = 5  # moves + hover
    num_obs = 10

    a_corner = _cell_index(0, 0, n)
    b_corner = _cell_index(n - 1, n - 1, n)

    def agent_options(g: int) -> list[int]:
        gx, gy = g % n, g // n
        opts = [g]
        for dx, dy in MOVES:
            if _in_grid(gx + dx, gy + dy, n):
                opts.append(_cell_index(gx + dx, gy + dy, n))
        return opts

    def is_end(d: int, g: int) -> bool:
        return d == b_corner or d == g

    transition: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for d in range(num_cells):
        dx0, dy0 = d % n, d // n
        drone_targets = []
        for ddx, ddy in MOVES:
            tx, ty = dx0 + ddx, dy0 + ddy
            drone_targets.append(_cell_index(tx, ty, n) if _in_grid(tx, ty, n) else d)
        drone_targets.append(d)  # hover
        for g in range(num_cells):
            s = d * num_cells + g
            if is_end(d, g):
                for a in range(num_actions):
                    transition[(s, a)] = [(terminal, 1.0)]
                continue
            opts = agent_options(g)
            p = 1.0 / len(opts)
            for a in range(num_actions):
                d2 = drone_targets[a]
                row: dict[int, float] = {}
                for g2 in opts:
                    s2 = d2 * num_cells + g2
                    row[s2] = row.get(s2, 0.0) + p
                transition[(s, a)] = sorted(row.items())
    for a in range(num_actions):
        transition[(terminal, a)] = [(terminal, 1.0)]

    observation = np.zeros((num_actions, num_states, num_obs))
    for d in range(num_cells):
        dx0, dy0 = d % n, d // n
        for g in range(num_cells):
            gx, gy = g % n, g // n
            s = d * num_cells + g
            rx, ry = gx - dx0, gy - dy0
            if abs(rx) <= 1 and abs(ry) <= 1:
                observation[:, s, (rx + 1) + 3 * (ry + 1)] = 1.0
            else:
                observation[:, s, OBS_NOT_VISIBLE] = 1.0
    observation[:, terminal, OBS_NOT_VISIBLE] = 1.0

    labels: dict[int, set[str]] = {}
    for g in range(num_cells):
        labels.setdefault(a_corner * num_cells + g, set()).add("A")
        labels.setdefault(b_corner * num_cells + g, set()).add("B")
    for d in range(num_cells):
        labels.setdefault(d * num_cells + d, set()).add("det")

    fov = {
        _cell_index(x, y, n)
        for x in (0, 1)
        for y in (0, 1)
    }
    outside = [g for g in range(num_cells) if g not in fov]
    initial = np.zeros(num_states)
    for g in outside:
        initial[a_corner * num_cells + g] = 1.0 / len(outside)

    return TabularPomdp(
        num_states=num_states,
        num_actions=num_actions,
        num_observations=num_obs,
        transition=transition,
        observation=observation,
        initial_belief=initial,
        discount=1.0,
        labels={s: frozenset(ps) for s, ps in labels.items()},
        terminal_states=frozenset({terminal}),
    )
