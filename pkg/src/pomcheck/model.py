"""Tabular POMDP data model, validation, and belief arithmetic.

Transition tables are stored sparsely as (state, action) -> [(s', p), ...];
observation tables densely as an (A, S, O) array. Models are treated as
immutable after construction and may be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ImpossibleObservation, ModelError

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class Belief:
    """Probability distribution over the states of a specific model."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1:
            raise ModelError("belief must be a vector")
        if p.min(initial=0.0) < -SIMPLEX_TOL:
            raise ModelError("belief has negative entries")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise ModelError(f"belief sums to {p.sum()!r}, not 1")

    def __len__(self):
        return len(self.probs)

    @staticmethod
    def point_mass(state: int, num_states: int) -> "Belief":
        p = np.zeros(num_states)
        p[state] = 1.0
        return Belief(p)


def _canonical_transition(transition):
    canon = {}
    for (s, a), row in transition.items():
        merged: dict[int, float] = {}
        for s2, p in row:
            if p != 0.0:
                merged[int(s2)] = merged.get(int(s2), 0.0) + float(p)
        if merged:
            canon[(int(s), int(a))] = tuple(sorted(merged.items()))
    return canon


@dataclass(eq=False)
class TabularPomdp:
    """Finite POMDP with state labels for model checking.

    transition maps (s, a) to a list of (s', p); unlisted pairs have
    probability zero. observation[a, s', o] is O(o | s', a). labels maps a
    state to the set of atomic propositions holding there; states without
    an entry carry no labels.
    """

    num_states: int
    num_actions: int
    num_observations: int
    transition: dict[tuple[int, int], tuple[tuple[int, float], ...]]
    observation: np.ndarray
    initial_belief: np.ndarray
    discount: float = 1.0
    labels: dict[int, frozenset[str]] = field(default_factory=dict)
    terminal_states: frozenset[int] = frozenset()
    reward: np.ndarray | None = None

    def __post_init__(self):
        self.transition = _canonical_transition(self.transition)
        self.observation = np.asarray(self.observation, dtype=float)
        self.initial_belief = np.asarray(self.initial_belief, dtype=float)
        self.labels = {
            int(s): frozenset(props) for s, props in self.labels.items() if props
        }
        self.terminal_states = frozenset(int(s) for s in self.terminal_states)
        if self.reward is not None:
            self.reward = np.asarray(self.reward, dtype=float)
        self._trans_csr: list | None = None
        self._trans_csr_t: list | None = None

    # -- derived views -----------------------------------------------------

    @property
    def propositions(self) -> frozenset[str]:
        if not self.labels:
            return frozenset()
        return frozenset().union(*self.labels.values())

    def label_of(self, state: int) -> frozenset[str]:
        return self.labels.get(state, frozenset())

    def transition_row(self, s: int, a: int):
        return self.transition.get((s, a), ())

    def transition_matrices(self) -> list[sparse.csr_matrix]:
        """Per-action CSR matrices T_a[s, s'] (cached)."""
        if self._trans_csr is None:
            mats = []
            for a in range(self.num_actions):
                rows, cols, vals = [], [], []
                for s in range(self.num_states):
                    for s2, p in self.transition.get((s, a), ()):
                        rows.append(s)
                        cols.append(s2)
                        vals.append(p)
                mats.append(
                    sparse.csr_matrix(
                        (vals, (rows, cols)),
                        shape=(self.num_states, self.num_states),
                    )
                )
            self._trans_csr = mats
        return self._trans_csr

    def transition_matrices_t(self) -> list[sparse.csr_matrix]:
        """Transposed transition matrices, for predictive belief updates."""
        if self._trans_csr_t is None:
            self._trans_csr_t = [
                m.T.tocsr() for m in self.transition_matrices()
            ]
        return self._trans_csr_t

    def equals(self, other: "TabularPomdp") -> bool:
        return (
            self.num_states == other.num_states
            and self.num_actions == other.num_actions
            and self.num_observations == other.num_observations
            and self.discount == other.discount
            and self.transition == other.transition
            and np.array_equal(self.observation, other.observation)
            and np.array_equal(self.initial_belief, other.initial_belief)
            and self.labels == other.labels
            and self.terminal_states == other.terminal_states
            and (
                (self.reward is None and other.reward is None)
                or (
                    self.reward is not None
                    and other.reward is not None
                    and np.array_equal(self.reward, other.reward)
                )
            )
        )


def validate(model: TabularPomdp) -> list[str]:
    """Check all structural invariants; returns human-readable violations."""
    out = []
    if model.observation.shape != (
        model.num_actions,
        model.num_states,
        model.num_observations,
    ):
        out.append(
            f"observation table has shape {model.observation.shape}, expected "
            f"{(model.num_actions, model.num_states, model.num_observations)}"
        )
        return out
    for (s, a), row in sorted(model.transition.items()):
        if not (0 <= s < model.num_states and 0 <= a < model.num_actions):
            out.append(f"T entry ({s},{a}) out of range")
            continue
        total = 0.0
        for s2, p in row:
            if not 0 <= s2 < model.num_states:
                out.append(f"T({s2}|{s},{a}) has out-of-range successor")
            if p < 0:
                out.append(f"T({s2}|{s},{a}) = {p!r} is negative")
            total += p
        if abs(total - 1.0) > SIMPLEX_TOL:
            out.append(
                f"T row (s={s},a={a}) sums to {total!r} (residual {abs(total - 1.0):.1e})"
            )
    for s in range(model.num_states):
        for a in range(model.num_actions):
            if (s, a) not in model.transition:
                out.append(f"T row (s={s},a={a}) sums to 0.0 (residual 1.0e+00)")
    if (model.observation < -0.0).any():
        out.append("observation table has negative entries")
    sums = model.observation.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1.0) > SIMPLEX_TOL)
    for a, s2 in bad:
        out.append(
            f"O row (s'={s2},a={a}) sums to {sums[a, s2]!r} "
            f"(residual {abs(sums[a, s2] - 1.0):.1e})"
        )
    b0 = model.initial_belief
    if b0.shape != (model.num_states,):
        out.append(f"initial belief has shape {b0.shape}")
    else:
        if b0.min(initial=0.0) < -SIMPLEX_TOL:
            out.append("initial belief has negative entries")
        if abs(b0.sum() - 1.0) > SIMPLEX_TOL:
            out.append(
                f"initial belief sums to {b0.sum()!r} "
                f"(residual {abs(b0.sum() - 1.0):.1e})"
            )
    if not 0.0 < model.discount <= 1.0:
        out.append(f"discount {model.discount!r} outside (0, 1]")
    for s in sorted(model.terminal_states):
        for a in range(model.num_actions):
            row = dict(model.transition.get((s, a), ()))
            if row.get(s, 0.0) != 1.0 or len(row) != 1:
                out.append(
                    f"terminal state {s} is not absorbing under action {a}"
                )
    for s in model.labels:
        if not 0 <= s < model.num_states:
            out.append(f"label attached to out-of-range state {s}")
    return out


def belief_update(model: TabularPomdp, b: Belief, a: int, o: int) -> Belief:
    """Bayes filter step: condition on having taken a and observed o."""
    if not 0 <= a < model.num_actions:
        raise ModelError(f"action {a} out of range")
    if not 0 <= o < model.num_observations:
        raise ModelError(f"observation {o} out of range")
    pred = model.transition_matrices_t()[a] @ b.probs
    w = pred * model.observation[a, :, o]
    norm = w.sum()
    if norm <= 1e-12:
        raise ImpossibleObservation(
            f"observation {o} has probability {norm!r} after action {a}"
        )
    return Belief(w / norm)
