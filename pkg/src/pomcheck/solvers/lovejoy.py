"""Fixed-grid upper bound on the belief simplex (Lovejoy-style).

The simplex is discretized with resolution m into all compositions of m
over the states; Bellman backups evaluate successor beliefs by upper-bound
interpolation over the Freudenthal triangulation of that grid, so every
iterate dominates the optimal value function. The whole backup operator is
assembled once as one sparse matrix per action over grid points, making
the iteration an ordinary finite MDP value iteration.

Because the grid count explodes with the state count, value-0 (fail) and
value-1 (success) states are first merged into single aggregate states;
the merge provably preserves the optimal value, and the bound computed on
the merged model remains an upper bound of the original.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import GridTooLarge, ModelError
from ..model import TabularPomdp
from .values import CompiledModel, mdp_value_iteration

_W_TOL = 1e-14


def grid_point_count(num_states: int, m: int) -> int:
    return math.comb(m + num_states - 1, num_states - 1)


def _binomial_table(n_max: int, k_max: int) -> np.ndarray:
    table = np.zeros((n_max + 1, k_max + 1), dtype=np.int64)
    table[:, 0] = 1
    for n in range(1, n_max + 1):
        for k in range(1, min(n, k_max) + 1):
            table[n, k] = table[n - 1, k - 1] + table[n - 1, k]
    return table


class _Ranker:
    """Colex ranking of compositions of m into S parts via the bar bijection."""

    def __init__(self, num_states: int, m: int):
        self.num_states = num_states
        self.m = m
        self.binom = _binomial_table(m + num_states, num_states)

    def rank(self, comps: np.ndarray) -> np.ndarray:
        bars = np.cumsum(comps[:, :-1], axis=1) + np.arange(comps.shape[1] - 1)
        ks = np.arange(1, comps.shape[1])
        return self.binom[bars, ks].sum(axis=1)


def simplex_grid(num_states: int, m: int) -> np.ndarray:
    """All compositions of m into num_states parts, ordered by colex rank."""
    n_points = grid_point_count(num_states, m)
    k = num_states - 1
    if k == 0:
        return np.array([[m]], dtype=np.int64)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(m + k), k)),
        dtype=np.int64,
        count=n_points * k,
    ).reshape(n_points, k)
    padded = np.column_stack(
        [np.full(n_points, -1, dtype=np.int64), flat, np.full(n_points, m + k, dtype=np.int64)]
    )
    comps = np.diff(padded, axis=1) - 1
    ranks = _Ranker(num_states, m).rank(comps)
    order = np.argsort(ranks)
    return comps[order]


def freudenthal_weights(x: np.ndarray):
    """Triangulation vertices and barycentric weights for scaled beliefs.

    x is (B, S) with rows summing to the resolution m. Yields S pairs
    (vertex compositions (B, S) int64, weights (B,)); weights are
    nonnegative, sum to one per row, and reproduce x exactly.
    """
    b, s = x.shape
    y = np.cumsum(x[:, ::-1], axis=1)[:, ::-1]
    v = np.floor(y)
    v[:, 0] = np.round(y[:, 0])
    d = y - v
    d[:, 0] = 0.0
    if s == 1:
        yield v.astype(np.int64), np.ones(b)
        return
    order = np.argsort(-d[:, 1:], axis=1, kind="stable") + 1
    d_sorted = np.take_along_axis(d, order, axis=1)  # (B, S-1) descending
    lambdas = np.empty((b, s))
    lambdas[:, 0] = 1.0 - d_sorted[:, 0]
    if s > 2:
        lambdas[:, 1:-1] = d_sorted[:, :-1] - d_sorted[:, 1:]
    lambdas[:, -1] = d_sorted[:, -1]

    u = v.copy()
    rows = np.arange(b)
    for k in range(s):
        if k > 0:
            u[rows, order[:, k - 1]] += 1.0
        comp = np.empty((b, s))
        comp[:, :-1] = u[:, :-1] - u[:, 1:]
        comp[:, -1] = u[:, -1]
        yield comp.astype(np.int64), lambdas[:, k]


def _interpolate(values: np.ndarray, beliefs: np.ndarray, m: int, ranker: _Ranker) -> np.ndarray:
    out = np.zeros(beliefs.shape[0])
    for comp, lam in freudenthal_weights(beliefs * m):
        mask = lam > _W_TOL
        if mask.any():
            out[mask] += lam[mask] * values[ranker.rank(comp[mask])]
    return out


# ---------------------------------------------------------------------------
# value-preserving state merging


def merge_decided_states(product) -> tuple[TabularPomdp, np.ndarray, int, int]:
    """Collapse success states into one and value-zero states into another.

    Success is absorbing with a unit reward, failure is absorbing with no
    reward; trajectories entering either contribute to the value
    independently of any further observations, so merging preserves the
    optimal value exactly while shrinking the simplex dimension.
    """
    if product.success is None or product.fail is None:
        raise ModelError("attach the reachability reward before solving")
    pomdp = product.pomdp
    success = set(product.success)
    fail = set(product.fail)
    live = [i for i in range(pomdp.num_states) if i not in success and i not in fail]
    new_index = {s: i for i, s in enumerate(live)}
    succ_id = len(live)
    fail_id = len(live) + 1
    n = len(live) + 2

    def remap(s: int) -> int:
        if s in success:
            return succ_id
        if s in fail:
            return fail_id
        return new_index[s]

    transition: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for i, s in enumerate(live):
        for a in range(pomdp.num_actions):
            merged: dict[int, float] = {}
            for s2, p in pomdp.transition[(s, a)]:
                t = remap(s2)
                merged[t] = merged.get(t, 0.0) + p
            transition[(i, a)] = sorted(merged.items())
    for a in range(pomdp.num_actions):
        transition[(succ_id, a)] = [(fail_id, 1.0)]
        transition[(fail_id, a)] = [(fail_id, 1.0)]

    observation = np.empty((pomdp.num_actions, n, pomdp.num_observations))
    observation[:, : len(live), :] = pomdp.observation[:, live, :]
    observation[:, len(live):, :] = 1.0 / pomdp.num_observations

    reward = np.zeros((n, pomdp.num_actions))
    reward[succ_id, :] = 1.0

    b0 = np.zeros(n)
    for s, p in enumerate(pomdp.initial_belief):
        if p > 0:
            b0[remap(s)] += p

    merged_pomdp = TabularPomdp(
        num_states=n,
        num_actions=pomdp.num_actions,
        num_observations=pomdp.num_observations,
        transition=transition,
        observation=observation,
        initial_belief=b0,
        discount=1.0,
        terminal_states=frozenset({fail_id}),
        reward=reward,
    )
    return merged_pomdp, b0, succ_id, fail_id


# ---------------------------------------------------------------------------
# the grid solver


@dataclass
class LovejoyResult:
    value: float
    num_points: int
    iterations: int
    residual: float


def solve_lovejoy(
    product,
    m: int,
    residual_tol: float = 1e-6,
    max_points: float = 1e7,
    max_iter: int = 100_000,
    merge: bool = True,
) -> LovejoyResult:
    """Upper bound at the initial belief from a resolution-m grid.

    Raises GridTooLarge when the grid would exceed max_points.
    """
    if m < 1:
        raise ModelError("grid resolution must be at least 1")
    if merge and hasattr(product, "success"):
        pomdp, b0, _succ, _fail = merge_decided_states(product)
    else:
        pomdp = getattr(product, "pomdp", product)
        b0 = pomdp.initial_belief
    n_points = grid_point_count(pomdp.num_states, m)
    if n_points > max_points:
        raise GridTooLarge(
            f"grid with resolution {m} over {pomdp.num_states} states has "
            f"{n_points} points (cap {int(max_points)})"
        )
    model = CompiledModel(pomdp)
    s = pomdp.num_states
    ranker = _Ranker(s, m)
    grid = simplex_grid(s, m)
    beliefs = grid.astype(float) / m

    corner = np.minimum(mdp_value_iteration(model), 1.0)

    mats = []
    rvecs = []
    chunk = max(1, int(2_000_000 // max(s, 1)))
    for a in range(model.num_actions):
        rows_all, cols_all, vals_all = [], [], []
        pred = (model.trans_t[a] @ beliefs.T).T  # (N, S)
        for o in range(model.num_observations):
            w = pred * model.obs[a][:, o]
            norms = w.sum(axis=1)
            live = np.flatnonzero(norms > 1e-300)
            for lo in range(0, len(live), chunk):
                idx = live[lo : lo + chunk]
                taus = w[idx] / norms[idx, None]
                for comp, lam in freudenthal_weights(taus * m):
                    mask = lam > _W_TOL
                    if not mask.any():
                        continue
                    rows_all.append(idx[mask])
                    cols_all.append(ranker.rank(comp[mask]))
                    vals_all.append(lam[mask] * norms[idx][mask])
        rows = np.concatenate(rows_all).astype(np.int32)
        cols = np.concatenate(cols_all).astype(np.int32)
        vals = np.concatenate(vals_all)
        mats.append(
            sparse.coo_matrix((vals, (rows, cols)), shape=(n_points, n_points)).tocsr()
        )
        rvecs.append(beliefs @ model.reward[:, a])

    v = beliefs @ corner
    iterations = 0
    resid = np.inf
    for iterations in range(1, max_iter + 1):
        q = np.max([rvecs[a] + mats[a] @ v for a in range(model.num_actions)], axis=0)
        np.minimum(q, v, out=q)
        resid = float(np.max(v - q))
        v = q
        if resid <= residual_tol:
            break

    value = float(_interpolate(v, b0[None, :], m, ranker)[0])
    return LovejoyResult(
        value=value, num_points=n_points, iterations=iterations, residual=resid
    )
