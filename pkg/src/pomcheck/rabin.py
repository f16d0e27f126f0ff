"""Deterministic Rabin automata and the fragment-based LTL converter.

Automata are complete by construction: every violating progression state
collapses into a single rejecting sink, so downstream product building
never deals with partial transition functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import ltl
from .errors import EmptyCycle, UnsupportedFragment
from .ltl import (
    CO_SAFE,
    FALSE,
    PERSISTENCE,
    RECURRENCE,
    SAFE,
    TRUE,
    UNSUPPORTED,
    Formula,
)


@dataclass(eq=False)
class Dra:
    """Complete deterministic Rabin automaton over letters from 2^propositions.

    Letters are encoded as bitmasks: bit i set means propositions[i] holds.
    delta[q][mask] is the unique successor state. Acceptance is the usual
    Rabin disjunction over (L_i, K_i) pairs: some pair must have K_i visited
    infinitely often and L_i only finitely often.
    """

    propositions: tuple[str, ...]
    num_states: int
    initial: int
    delta: list[list[int]]
    acc_pairs: list[tuple[frozenset[int], frozenset[int]]]
    state_names: list[str] = field(default_factory=list)

    def letter_mask(self, letter) -> int:
        mask = 0
        for i, p in enumerate(self.propositions):
            if p in letter:
                mask |= 1 << i
        return mask

    def step(self, q: int, letter) -> int:
        return self.delta[q][self.letter_mask(letter)]

    def validate(self) -> None:
        width = 1 << len(self.propositions)
        assert len(self.delta) == self.num_states
        for q, row in enumerate(self.delta):
            assert len(row) == width, f"state {q} has incomplete transitions"
            for q2 in row:
                assert 0 <= q2 < self.num_states
        for li, ki in self.acc_pairs:
            assert all(0 <= q < self.num_states for q in li | ki)


def _mask_letter(mask: int, props: tuple[str, ...]) -> frozenset[str]:
    return frozenset(p for i, p in enumerate(props) if mask >> i & 1)


# ---------------------------------------------------------------------------
# formula progression


def progress(f: Formula, letter: frozenset[str]) -> Formula:
    """One-step progression: the obligation left after consuming `letter`."""
    if isinstance(f, (ltl.TrueFormula, ltl.FalseFormula)):
        return f
    if isinstance(f, ltl.Atom):
        return TRUE if f.name in letter else FALSE
    if isinstance(f, ltl.Not):
        return ltl.lnot(progress(f.arg, letter))
    if isinstance(f, ltl.And):
        return ltl.conj(*(progress(a, letter) for a in f.args))
    if isinstance(f, ltl.Or):
        return ltl.disj(*(progress(a, letter) for a in f.args))
    if isinstance(f, ltl.Next):
        return f.arg
    if isinstance(f, ltl.Until):
        return ltl.disj(progress(f.right, letter), ltl.conj(progress(f.left, letter), f))
    if isinstance(f, ltl.Release):
        return ltl.conj(progress(f.right, letter), ltl.disj(progress(f.left, letter), f))
    if isinstance(f, ltl.Eventually):
        return ltl.disj(progress(f.arg, letter), f)
    if isinstance(f, ltl.Always):
        return ltl.conj(progress(f.arg, letter), f)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# component automata for the product construction

_FAIL = "fail"


class _ProgressionComponent:
    """Tracks a safe or co-safe conjunct by progression; false is fatal."""

    def __init__(self, formula: Formula, cosafe: bool):
        self.initial = formula
        self.cosafe = cosafe

    def step(self, state: Formula, letter: frozenset[str]):
        return progress(state, letter)

    def satisfied(self, state: Formula) -> bool:
        return state == TRUE


class _TrackerComponent:
    """Two-state tracker: did the last letter satisfy the predicate."""

    initial = 0

    def __init__(self, predicate: Formula):
        self.predicate = predicate

    def step(self, state: int, letter: frozenset[str]) -> int:
        return 1 if ltl.eval_propositional(self.predicate, letter) else 0


class _CounterComponent:
    """Round-robin counter over several recurrence predicates.

    State m (one past the last predicate index) flags a completed round and
    must be visited infinitely often iff every predicate holds infinitely
    often; this folds a conjunction of recurrence conditions into a single
    Rabin pair.
    """

    initial = 0

    def __init__(self, predicates: list[Formula]):
        self.predicates = predicates
        self.m = len(predicates)

    def step(self, state: int, letter: frozenset[str]) -> int:
        c = 0 if state == self.m else state
        if ltl.eval_propositional(self.predicates[c], letter):
            return c + 1 if c + 1 <= self.m - 1 else self.m
        return c


def ltl_to_dra(f: Formula) -> Dra:
    """Convert a supported-fragment LTL formula to a complete DRA.

    Every top-level conjunct of the negation normal form must classify as
    co-safe, safe, recurrence, or persistence; otherwise UnsupportedFragment
    is raised (import an externally built automaton via HOA in that case).
    """
    nnf = ltl.to_nnf(f)
    conjuncts = ltl.split_conjuncts(nnf)
    tags = [ltl.classify_conjunct(c) for c in conjuncts]
    bad = [str(c) for c, t in zip(conjuncts, tags) if t == UNSUPPORTED]
    if bad:
        raise UnsupportedFragment(
            "conjuncts outside the supported fragments: "
            + "; ".join(bad)
            + " (translate externally and import with --hoa)"
        )

    props = tuple(sorted(ltl.atoms(f)))
    components: list = []
    cosafe_idx: list[int] = []
    pers_idx: list[int] = []
    rec_single_idx: int | None = None
    counter_idx: int | None = None

    rec_predicates = [c.arg.arg for c, t in zip(conjuncts, tags) if t == RECURRENCE]
    for c, t in zip(conjuncts, tags):
        if t in (CO_SAFE, SAFE):
            if t == CO_SAFE:
                cosafe_idx.append(len(components))
            components.append(_ProgressionComponent(c, cosafe=t == CO_SAFE))
        elif t == PERSISTENCE:
            pers_idx.append(len(components))
            components.append(_TrackerComponent(c.arg.arg))
        elif t == RECURRENCE and len(rec_predicates) == 1:
            rec_single_idx = len(components)
            components.append(_TrackerComponent(c.arg.arg))
    if len(rec_predicates) >= 2:
        counter_idx = len(components)
        components.append(_CounterComponent(rec_predicates))

    initial = tuple(comp.initial for comp in components)
    width = 1 << len(props)
    letters = [_mask_letter(m, props) for m in range(width)]

    index: dict = {}
    order: list = []

    def intern(state) -> int:
        if state is not _FAIL and any(isinstance(c, ltl.FalseFormula) for c in state):
            state = _FAIL
        if state not in index:
            index[state] = len(order)
            order.append(state)
        return index[state]

    delta: list[list[int]] = []
    frontier = [intern(initial)]
    while frontier:
        q = frontier.pop(0)
        while len(delta) <= q:
            delta.append([])
        state = order[q]
        row = []
        for letter in letters:
            if state is _FAIL:
                row.append(q)
                continue
            nstate = tuple(comp.step(c, letter) for comp, c in zip(components, state))
            known = len(order)
            q2 = intern(nstate)
            if q2 == known:  # newly discovered
                frontier.append(q2)
            row.append(q2)
        delta[q] = row
    q0 = 0  # the initial tuple (possibly collapsed to fail) is interned first

    num_states = len(order)
    fail_states = {index[_FAIL]} if _FAIL in index else set()
    pending = set()
    pers_bad = set()
    for q, state in enumerate(order):
        if state is _FAIL:
            continue
        if any(not components[i].satisfied(state[i]) for i in cosafe_idx):
            pending.add(q)
        if any(state[i] == 0 for i in pers_idx):
            pers_bad.add(q)
    l_base = frozenset(fail_states | pending | pers_bad)

    if counter_idx is not None:
        m = components[counter_idx].m
        k_set = frozenset(
            q for q, s in enumerate(order) if s is not _FAIL and s[counter_idx] == m
        )
    elif rec_single_idx is not None:
        k_set = frozenset(
            q for q, s in enumerate(order) if s is not _FAIL and s[rec_single_idx] == 1
        )
    else:
        k_set = frozenset(range(num_states)) - l_base

    names = []
    for state in order:
        if state is _FAIL:
            names.append("fail")
        elif not state:
            names.append("true")
        else:
            names.append(
                " ; ".join(
                    str(c) if isinstance(c, Formula) else f"#{c}" for c in state
                )
            )

    dra = Dra(
        propositions=props,
        num_states=num_states,
        initial=q0,
        delta=delta,
        acc_pairs=[(l_base, k_set)],
        state_names=names,
    )
    dra.validate()
    return dra


# ---------------------------------------------------------------------------
# lasso acceptance


def dra_accepts(dra: Dra, prefix: list, cycle: list) -> bool:
    """Decide acceptance of the ultimately periodic word prefix . cycle^omega.

    Runs the automaton through the prefix, then iterates the cycle until a
    (state, cycle position) pair repeats; the states on the detected loop
    are the infinitely visited set checked against the Rabin pairs.
    """
    if not cycle:
        raise EmptyCycle("cycle part of a lasso word must be nonempty")
    q = dra.initial
    for letter in prefix:
        q = dra.step(q, letter)
    seen: dict[tuple[int, int], int] = {}
    trace: list[int] = []
    pos = 0
    while (q, pos) not in seen:
        seen[(q, pos)] = len(trace)
        trace.append(q)
        q = dra.step(q, cycle[pos])
        pos = (pos + 1) % len(cycle)
    loop_states = set(trace[seen[(q, pos)]:])
    return any(
        loop_states & k_i and not loop_states & l_i for l_i, k_i in dra.acc_pairs
    )
