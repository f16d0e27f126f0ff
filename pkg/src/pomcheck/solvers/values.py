"""Shared solver machinery: compiled model caches, value iteration on the
underlying MDP, blind-policy lower bounds, and alpha-vector policies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PolicyUndefined
from ..model import TabularPomdp


@dataclass(frozen=True)
class AlphaVector:
    """Linear value-function piece over product states, tagged with its action."""

    values: np.ndarray
    action: int


class CompiledModel:
    """Dense/sparse caches for fast belief-space arithmetic on one POMDP."""

    def __init__(self, pomdp: TabularPomdp):
        self.pomdp = pomdp
        self.num_states = pomdp.num_states
        self.num_actions = pomdp.num_actions
        self.num_observations = pomdp.num_observations
        self.trans = pomdp.transition_matrices()
        self.trans_t = pomdp.transition_matrices_t()
        self.obs = [np.ascontiguousarray(pomdp.observation[a]) for a in range(pomdp.num_actions)]
        if pomdp.reward is None:
            self.reward = np.zeros((pomdp.num_states, pomdp.num_actions))
        else:
            self.reward = np.asarray(pomdp.reward, dtype=float)

    def predict(self, b: np.ndarray, a: int) -> np.ndarray:
        """Pre-observation successor distribution after action a."""
        return self.trans_t[a] @ b

    def tau_all(self, b: np.ndarray, a: int):
        """All posterior beliefs and observation probabilities for action a.

        Returns (W, norms): W[:, o] is the unnormalized posterior, norms[o]
        its mass Pr(o | b, a); columns with zero mass are impossible.
        """
        pred = self.predict(b, a)
        w = pred[:, None] * self.obs[a]
        return w, w.sum(axis=0)


def mdp_value_iteration(
    model: CompiledModel, tol: float = 1e-12, max_iter: int = 500_000
) -> np.ndarray:
    """Undiscounted value iteration from below on the underlying MDP.

    With the reachability reward (success pays 1 then terminates) the least
    fixed point is the per-state maximum reachability probability.
    """
    v = np.zeros(model.num_states)
    for _ in range(max_iter):
        q = np.max(
            [model.reward[:, a] + model.trans[a] @ v for a in range(model.num_actions)],
            axis=0,
        )
        resid = np.max(np.abs(q - v))
        v = q
        if resid <= tol:
            break
    return np.minimum(v, 1.0)


def blind_alphas(
    model: CompiledModel, tol: float = 1e-12, max_iter: int = 500_000
) -> list[AlphaVector]:
    """Value of repeating one action forever; valid lower-bound vectors.

    Pointwise-dominated (and duplicate) vectors are dropped.
    """
    out: list[AlphaVector] = []
    for a in range(model.num_actions):
        alpha = np.zeros(model.num_states)
        for _ in range(max_iter):
            nxt = model.reward[:, a] + model.trans[a] @ alpha
            resid = np.max(np.abs(nxt - alpha))
            alpha = nxt
            if resid <= tol:
                break
        out.append(AlphaVector(values=alpha, action=a))
    kept: list[AlphaVector] = []
    for cand in out:
        if any(np.all(other.values >= cand.values) for other in kept):
            continue
        kept = [o for o in kept if not np.all(cand.values >= o.values)]
        kept.append(cand)
    return kept


def solve_qmdp(model: CompiledModel | TabularPomdp) -> list[AlphaVector]:
    """QMDP upper bound: one alpha per action from the MDP value function."""
    if isinstance(model, TabularPomdp):
        model = CompiledModel(model)
    v = mdp_value_iteration(model)
    return [
        AlphaVector(values=model.reward[:, a] + model.trans[a] @ v, action=a)
        for a in range(model.num_actions)
    ]


def solve_fib(
    model: CompiledModel | TabularPomdp,
    tol: float = 1e-10,
    max_iter: int = 20_000,
) -> list[AlphaVector]:
    """Fast informed bound, iterated downward from the QMDP vectors.

    Every iterate dominates the true value function, so early stopping at
    the residual tolerance keeps the bound sound; the fixed point is
    pointwise at most QMDP.
    """
    if isinstance(model, TabularPomdp):
        model = CompiledModel(model)
    g = np.array([a.values for a in solve_qmdp(model)])  # (A, S)
    num_a = model.num_actions
    for _ in range(max_iter):
        new = np.empty_like(g)
        for a in range(num_a):
            acc = np.zeros(model.num_states)
            for o in range(model.num_observations):
                weighted = model.obs[a][:, o][:, None] * g.T  # (S, A')
                acc += np.max(model.trans[a] @ weighted, axis=1)
            new[a] = model.reward[:, a] + acc
        new = np.minimum(new, g)  # keep the from-above iteration monotone
        resid = np.max(g - new)
        g = new
        if resid <= tol:
            break
    return [AlphaVector(values=g[a], action=a) for a in range(num_a)]


def alpha_matrix(alphas: list[AlphaVector]) -> np.ndarray:
    return np.array([a.values for a in alphas])


def best_alpha(alphas: list[AlphaVector], b: np.ndarray) -> tuple[float, int]:
    values = alpha_matrix(alphas) @ b
    best = values.max()
    idx = int(np.flatnonzero(values == best)[0])
    return float(best), idx


def policy_action(bounds, b) -> int:
    """Action of the maximizing lower-bound alpha; ties pick the lowest action."""
    alphas = bounds.lower if hasattr(bounds, "lower") else bounds
    if not len(alphas):
        raise PolicyUndefined("no alpha vectors available")
    probs = b.probs if hasattr(b, "probs") else np.asarray(b)
    if hasattr(alphas, "action_at"):
        return alphas.action_at(probs)
    values = alpha_matrix(list(alphas)) @ probs
    best = values.max()
    ties = [alphas[i].action for i in np.flatnonzero(values == best)]
    return int(min(ties))


class AlphaVectorPolicy:
    """Matrix-backed greedy policy over a fixed alpha-vector set."""

    def __init__(self, alphas: list[AlphaVector]):
        if not alphas:
            raise PolicyUndefined("empty alpha-vector set")
        self.matrix = alpha_matrix(alphas)
        self.actions = np.array([a.action for a in alphas], dtype=int)

    def __len__(self):
        return len(self.actions)

    def action(self, b: np.ndarray) -> int:
        values = self.matrix @ b
        best = values.max()
        return int(self.actions[values == best].min())

    def value(self, b: np.ndarray) -> float:
        return float((self.matrix @ b).max())
