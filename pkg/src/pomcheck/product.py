"""Product of a labeled POMDP with a DRA, success states, and the
reachability reward that reduces model checking to planning.

Product states are the (state, automaton state) pairs reachable from the
initial belief support, indexed in sorted (s-major, q-minor) order,
followed by an artificial sink (for partial automata) and the post-success
terminal that success states collapse to once their unit reward is paid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import PropositionMismatch
from .mec import Mec, maximal_end_components
from .model import TabularPomdp
from .rabin import Dra


@dataclass(eq=False)
class ProductPomdp:
    pomdp: TabularPomdp
    base: TabularPomdp
    dra: Dra
    pairs: list[tuple[int, int]]
    sink: int
    post_terminal: int
    success: frozenset[int] | None = None
    fail: frozenset[int] | None = None

    @property
    def num_states(self) -> int:
        return self.pomdp.num_states

    @property
    def initial_belief(self) -> np.ndarray:
        return self.pomdp.initial_belief

    def automaton_component(self, i: int) -> int | None:
        return self.pairs[i][1] if i < len(self.pairs) else None

    def describe_state(self, i: int) -> str:
        if i == self.sink:
            return "sink"
        if i == self.post_terminal:
            return "post-success"
        s, q = self.pairs[i]
        return f"(s={s}, q={q})"


def build_product(model: TabularPomdp, dra: Dra, strict: bool = True) -> ProductPomdp:
    """Synchronous product; the automaton consumes the source state's label.

    Only pairs reachable from the initial belief support are materialized.
    With strict=True, automaton propositions missing from the model's label
    vocabulary raise PropositionMismatch; otherwise they are read as false.
    """
    missing = set(dra.propositions) - set(model.propositions)
    if strict and missing:
        raise PropositionMismatch(missing)

    masks = [
        dra.letter_mask(model.label_of(s)) for s in range(model.num_states)
    ]

    b0 = model.initial_belief
    seeds = [(int(s), dra.initial) for s in np.flatnonzero(b0)]
    seen = set(seeds)
    frontier = list(seeds)
    while frontier:
        s, q = frontier.pop()
        q2 = dra.delta[q][masks[s]]
        if q2 < 0:
            continue  # routes to the sink
        for a in range(model.num_actions):
            for s2, _p in model.transition.get((s, a), ()):
                pair = (s2, q2)
                if pair not in seen:
                    seen.add(pair)
                    frontier.append(pair)

    pairs = sorted(seen)
    index = {pair: i for i, pair in enumerate(pairs)}
    num_live = len(pairs)
    sink = num_live
    post_terminal = num_live + 1
    num_states = num_live + 2

    transition: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for i, (s, q) in enumerate(pairs):
        q2 = dra.delta[q][masks[s]]
        for a in range(model.num_actions):
            if q2 < 0:
                transition[(i, a)] = [(sink, 1.0)]
            else:
                transition[(i, a)] = [
                    (index[(s2, q2)], p)
                    for s2, p in model.transition.get((s, a), ())
                ]
    for a in range(model.num_actions):
        transition[(sink, a)] = [(sink, 1.0)]
        transition[(post_terminal, a)] = [(post_terminal, 1.0)]

    base_of = np.array([s for s, _q in pairs], dtype=int)
    observation = np.empty((model.num_actions, num_states, model.num_observations))
    for a in range(model.num_actions):
        observation[a, :num_live, :] = model.observation[a, base_of, :]
    observation[:, sink:, :] = 1.0 / model.num_observations

    initial = np.zeros(num_states)
    for s in np.flatnonzero(b0):
        initial[index[(int(s), dra.initial)]] = b0[s]

    pomdp = TabularPomdp(
        num_states=num_states,
        num_actions=model.num_actions,
        num_observations=model.num_observations,
        transition=transition,
        observation=observation,
        initial_belief=initial,
        discount=1.0,
        labels={},
        terminal_states=frozenset({sink, post_terminal}),
    )
    return ProductPomdp(
        pomdp=pomdp,
        base=model,
        dra=dra,
        pairs=pairs,
        sink=sink,
        post_terminal=post_terminal,
    )


def success_states(product: ProductPomdp, dra: Dra | None = None) -> frozenset[int]:
    """States certified to satisfy the objective with probability one.

    Per Rabin pair: remove product states whose automaton component is in
    L_i, decompose the rest into MECs, and keep every MEC that touches K_i.
    """
    dra = dra or product.dra
    out: set[int] = set()
    live = range(len(product.pairs))
    for l_i, k_i in dra.acc_pairs:
        allowed = [i for i in live if product.pairs[i][1] not in l_i]
        for mec in maximal_end_components(product.pomdp, restricted_to=allowed):
            if any(product.pairs[i][1] in k_i for i in mec.states):
                out.update(mec.states)
    return frozenset(out)


def attach_reachability(
    product: ProductPomdp, success: frozenset[int] | None = None
) -> ProductPomdp:
    """Finalize the reachability reward: success states pay 1 then terminate.

    Also computes the complementary fail set (states from which the success
    set is unreachable, hence value zero) used by the simulator to classify
    violations early.
    """
    if success is None:
        success = success_states(product)
    success = frozenset(success)

    transition = dict(product.pomdp.transition)
    for i in success:
        for a in range(product.pomdp.num_actions):
            transition[(i, a)] = [(product.post_terminal, 1.0)]

    reward = np.zeros((product.pomdp.num_states, product.pomdp.num_actions))
    if success:
        reward[sorted(success), :] = 1.0

    pomdp = TabularPomdp(
        num_states=product.pomdp.num_states,
        num_actions=product.pomdp.num_actions,
        num_observations=product.pomdp.num_observations,
        transition=transition,
        observation=product.pomdp.observation,
        initial_belief=product.pomdp.initial_belief,
        discount=1.0,
        labels={},
        terminal_states=product.pomdp.terminal_states,
        reward=reward,
    )

    reverse: dict[int, set[int]] = {}
    for (s, _a), row in transition.items():
        for s2, p in row:
            if p > 0:
                reverse.setdefault(s2, set()).add(s)
    can = set(success)
    frontier = list(success)
    while frontier:
        s2 = frontier.pop()
        for s in reverse.get(s2, ()):
            if s not in can:
                can.add(s)
                frontier.append(s)
    fail = frozenset(range(pomdp.num_states)) - frozenset(can)

    return ProductPomdp(
        pomdp=pomdp,
        base=product.base,
        dra=product.dra,
        pairs=product.pairs,
        sink=product.sink,
        post_terminal=product.post_terminal,
        success=success,
        fail=fail,
    )
