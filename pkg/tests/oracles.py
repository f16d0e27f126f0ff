"""Independent reference implementations used only as test oracles.

Nothing here shares code paths with the package: LTL satisfaction is
evaluated by direct semantic unrolling on lasso words, end components by
exhaustive subset enumeration, and MDP reachability by linear programming.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from pomcheck import ltl


# ---------------------------------------------------------------------------
# LTL semantics on ultimately periodic words


def eval_lasso(f: ltl.Formula, prefix: list, cycle: list) -> bool:
    """Evaluate f on the word prefix . cycle^omega by semantic unrolling."""
    assert cycle, "lasso cycle must be nonempty"
    word = [frozenset(x) for x in list(prefix) + list(cycle)]
    n = len(word)
    loop = len(prefix)

    def succ(i: int) -> int:
        return i + 1 if i + 1 < n else loop

    limit = n + len(cycle) + 1
    memo: dict[tuple[str, int], bool] = {}

    def ev(g: ltl.Formula, i: int) -> bool:
        key = (g.key(), i)
        if key in memo:
            return memo[key]
        memo[key] = result = _ev(g, i)
        return result

    def _ev(g: ltl.Formula, i: int) -> bool:
        if isinstance(g, ltl.TrueFormula):
            return True
        if isinstance(g, ltl.FalseFormula):
            return False
        if isinstance(g, ltl.Atom):
            return g.name in word[i]
        if isinstance(g, ltl.Not):
            return not ev(g.arg, i)
        if isinstance(g, ltl.And):
            return all(ev(a, i) for a in g.args)
        if isinstance(g, ltl.Or):
            return any(ev(a, i) for a in g.args)
        if isinstance(g, ltl.Next):
            return ev(g.arg, succ(i))
        if isinstance(g, ltl.Eventually):
            j = i
            for _ in range(limit):
                if ev(g.arg, j):
                    return True
                j = succ(j)
            return False
        if isinstance(g, ltl.Always):
            j = i
            for _ in range(limit):
                if not ev(g.arg, j):
                    return False
                j = succ(j)
            return True
        if isinstance(g, ltl.Until):
            j = i
            for _ in range(limit):
                if ev(g.right, j):
                    return True
                if not ev(g.left, j):
                    return False
                j = succ(j)
            return False
        if isinstance(g, ltl.Release):
            j = i
            for _ in range(limit):
                if not ev(g.right, j):
                    return False
                if ev(g.left, j):
                    return True
                j = succ(j)
            return True
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, 0)


def all_lassos(props: tuple[str, ...], max_prefix: int, max_cycle: int):
    """Yield every lasso (prefix, cycle) over 2^props within the size bounds."""
    letters = [
        frozenset(c)
        for k in range(len(props) + 1)
        for c in itertools.combinations(props, k)
    ]
    for plen in range(max_prefix + 1):
        for clen in range(1, max_cycle + 1):
            for prefix in itertools.product(letters, repeat=plen):
                for cycle in itertools.product(letters, repeat=clen):
                    yield list(prefix), list(cycle)


# ---------------------------------------------------------------------------
# end components by brute force


def _strongly_connected(states: frozenset[int], edges: dict[int, set[int]]) -> bool:
    if len(states) == 1:
        (s,) = states
        return s in edges.get(s, ())
    for src in states:
        seen = {src}
        stack = [src]
        while stack:
            u = stack.pop()
            for v in edges.get(u, ()):
                if v in states and v not in seen:
                    seen.add(v)
                    stack.append(v)
        if seen != states:
            return False
    return True


def brute_force_mecs(num_states: int, successors: dict[tuple[int, int], set[int]]):
    """Enumerate maximal end components of a small MDP.

    successors maps (state, action) to the support of the transition.
    Returns a sorted list of (state frozenset, {state: action frozenset}).
    """
    states = range(num_states)
    components = []
    for r in range(1, num_states + 1):
        for subset in itertools.combinations(states, r):
            sub = frozenset(subset)
            acts = {}
            ok = True
            for s in sub:
                enabled = frozenset(
                    a
                    for (s2, a), succ in successors.items()
                    if s2 == s and succ and succ <= sub
                )
                if not enabled:
                    ok = False
                    break
                acts[s] = enabled
            if not ok:
                continue
            edges = {
                s: set().union(*(successors[(s, a)] for a in acts[s]))
                for s in sub
            }
            if _strongly_connected(sub, edges):
                components.append((sub, acts))
    maximal = [
        (sub, acts)
        for sub, acts in components
        if not any(sub < other for other, _ in components)
    ]
    maximal.sort(key=lambda c: sorted(c[0]))
    return maximal


# ---------------------------------------------------------------------------
# MDP max reachability by linear programming


def lp_max_reachability(transition, num_states: int, num_actions: int, target) -> np.ndarray:
    """Solve max reachability with an LP: minimize sum(V) s.t. Bellman ineqs.

    transition maps (s, a) to a list of (s2, p) pairs.
    """
    target = set(target)
    # states that can reach the target under some resolution
    can_reach = set(target)
    changed = True
    while changed:
        changed = False
        for (s, a), row in transition.items():
            if s not in can_reach and any(p > 0 and s2 in can_reach for s2, p in row):
                can_reach.add(s)
                changed = True
    n = num_states
    a_ub = []
    b_ub = []
    for (s, a), row in transition.items():
        if s in target or s not in can_reach:
            continue
        coeffs = np.zeros(n)
        coeffs[s] = -1.0
        for s2, p in row:
            coeffs[s2] += p
        a_ub.append(coeffs)
        b_ub.append(0.0)
    bounds = []
    for s in range(n):
        if s in target:
            bounds.append((1.0, 1.0))
        elif s not in can_reach:
            bounds.append((0.0, 0.0))
        else:
            bounds.append((0.0, 1.0))
    if not a_ub:
        return np.array([b[0] for b in bounds])
    res = linprog(
        c=np.ones(n),
        A_ub=np.array(a_ub),
        b_ub=np.array(b_ub),
        bounds=bounds,
        method="highs",
    )
    assert res.success, res.message
    return res.x
