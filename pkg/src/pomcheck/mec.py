"""Maximal end component decomposition and MDP reachability values.

Both operate on the underlying MDP of a (product) POMDP: the observation
model is ignored, only the transition structure matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TabularPomdp


@dataclass
class Mec:
    """One maximal end component: its states and the enabled action sets."""

    states: frozenset[int]
    actions: dict[int, frozenset[int]]


MecDecomposition = list[Mec]


def _tarjan_sccs(nodes, successors) -> list[list[int]]:
    """Iterative Tarjan; returns SCCs of the node subset."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            pushed = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    pushed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(comp)
    return sccs


def maximal_end_components(
    model: TabularPomdp, restricted_to=None
) -> MecDecomposition:
    """Decompose the underlying MDP into maximal end components.

    Repeatedly: compute SCCs of the currently enabled edges, disable
    actions whose support leaves their SCC, drop states without enabled
    actions, until stable. States outside restricted_to (when given) are
    removed up front.
    """
    if restricted_to is None:
        states = set(range(model.num_states))
    else:
        states = set(int(s) for s in restricted_to)

    support = {
        (s, a): tuple(s2 for s2, _ in row)
        for (s, a), row in model.transition.items()
    }
    enabled: dict[int, set[int]] = {}
    for s in list(states):
        acts = {a for a in range(model.num_actions) if support.get((s, a))}
        if acts:
            enabled[s] = acts
        else:
            states.discard(s)

    def prune() -> None:
        # cascade: disable actions escaping `states`, drop actionless states
        dirty = True
        while dirty:
            dirty = False
            for s in sorted(states):
                for a in list(enabled[s]):
                    if any(s2 not in states for s2 in support[(s, a)]):
                        enabled[s].discard(a)
                        dirty = True
                if not enabled[s]:
                    states.discard(s)
                    del enabled[s]
                    dirty = True

    def succ(s):
        out = set()
        for a in enabled[s]:
            out.update(support[(s, a)])
        return out

    prune()
    while True:
        changed = False
        live = sorted(states)
        sccs = _tarjan_sccs(live, succ)
        comp_of = {}
        for i, comp in enumerate(sccs):
            for s in comp:
                comp_of[s] = i
        for s in live:
            for a in list(enabled[s]):
                if any(comp_of[s2] != comp_of[s] for s2 in support[(s, a)]):
                    enabled[s].discard(a)
                    changed = True
            if not enabled[s]:
                states.discard(s)
                del enabled[s]
                changed = True
        prune()
        if not changed:
            break

    mecs = []
    for comp in _tarjan_sccs(sorted(states), succ):
        comp_set = frozenset(comp)
        mecs.append(
            Mec(
                states=comp_set,
                actions={s: frozenset(enabled[s]) for s in comp},
            )
        )
    mecs.sort(key=lambda m: min(m.states))
    return mecs


def max_reachability_mdp(
    model: TabularPomdp,
    target,
    tol: float = 1e-10,
    max_iter: int = 1_000_000,
) -> np.ndarray:
    """Maximum probability of reaching the target set, per state.

    Value iteration from below with qualitative preprocessing: states with
    no path into the target are pinned to zero, target states to one.
    """
    target = frozenset(int(s) for s in target)
    n = model.num_states
    reverse: dict[int, set[int]] = {s: set() for s in range(n)}
    for (s, _a), row in model.transition.items():
        for s2, p in row:
            if p > 0:
                reverse[s2].add(s)
    can_reach = set(target)
    frontier = list(target)
    while frontier:
        s2 = frontier.pop()
        for s in reverse.get(s2, ()):
            if s not in can_reach:
                can_reach.add(s)
                frontier.append(s)

    target_vec = np.zeros(n, dtype=bool)
    target_vec[list(target)] = True
    zero_vec = np.ones(n, dtype=bool)
    zero_vec[list(can_reach)] = False

    mats = model.transition_matrices()
    v = np.zeros(n)
    v[target_vec] = 1.0
    for _ in range(max_iter):
        q = np.max([m @ v for m in mats], axis=0)
        q[target_vec] = 1.0
        q[zero_vec] = 0.0
        resid = np.max(np.abs(q - v))
        v = q
        if resid <= tol:
            break
    return v
