"""Sawtooth (convex-corner) upper bound over the belief simplex.

The bound is the minimum of the corner hyperplane and one sawtooth
constraint per stored belief point: a point (b_i, v_i) constrains a query b
only when supp(b_i) is covered by supp(b), contributing
c.b + (v_i - c.b_i) * min_{s in supp(b_i)} b(s) / b_i(s).
Points are stored sparsely and batch queries run in O(total nnz).
"""

from __future__ import annotations

import numpy as np

_USELESS = -1e-13  # constraints with v - c.b above this never tighten the bound


class SawtoothBound:
    def __init__(self, corners: np.ndarray, max_points: int = 30_000):
        self.corners = np.asarray(corners, dtype=float)
        self.max_points = max_points
        self._keys: dict[bytes, int] = {}
        self._supp: list[np.ndarray] = []
        self._data: list[np.ndarray] = []
        self._n = 0
        cap = 256
        self._val = np.empty(cap)
        self._cb = np.empty(cap)
        self._stamp = np.empty(cap, dtype=np.int64)
        self._dead: set[int] = set()
        # CSR snapshot over point ids [0, _built) for batch queries
        self._built = 0
        self._cols = np.empty(0, dtype=np.int64)
        self._flat = np.empty(0)
        self._indptr = np.zeros(1, dtype=np.int64)
        self._ids = np.empty(0, dtype=np.int64)

    def __len__(self):
        return self._n - len(self._dead)

    # -- maintenance ---------------------------------------------------------

    def _grow(self):
        cap = len(self._val) * 2
        for name in ("_val", "_cb", "_stamp"):
            buf = getattr(self, name)
            new = np.empty(cap, dtype=buf.dtype)
            new[: self._n] = buf[: self._n]
            setattr(self, name, new)

    def refresh(self) -> None:
        """Rebuild the CSR snapshot so batch queries see all live points."""
        live = [i for i in range(self._n) if i not in self._dead]
        self._ids = np.asarray(live, dtype=np.int64)
        if live:
            self._cols = np.concatenate([self._supp[i] for i in live])
            self._flat = np.concatenate([self._data[i] for i in live])
            lengths = np.fromiter((len(self._supp[i]) for i in live), dtype=np.int64)
            self._indptr = np.concatenate(([0], np.cumsum(lengths)))
        else:
            self._cols = np.empty(0, dtype=np.int64)
            self._flat = np.empty(0)
            self._indptr = np.zeros(1, dtype=np.int64)
        self._built = self._n

    def prune_stale(self, keep_newer_than: int) -> None:
        """Drop points not refreshed since the stamp; enforce the size cap."""
        live = [i for i in range(self._n) if i not in self._dead]
        for i in live:
            if self._stamp[i] < keep_newer_than:
                self._drop(i)
        live = [i for i in live if i not in self._dead]
        if len(live) > self.max_points:
            by_age = sorted(live, key=lambda i: (self._stamp[i], i))
            for i in by_age[: len(live) - self.max_points]:
                self._drop(i)
        self.refresh()

    def _drop(self, i: int) -> None:
        self._dead.add(i)
        self._keys.pop(self._key_of(self._supp[i], self._data[i]), None)

    @staticmethod
    def _key_of(supp: np.ndarray, data: np.ndarray) -> bytes:
        return supp.tobytes() + data.tobytes()

    # -- queries ---------------------------------------------------------------

    def value(self, b: np.ndarray) -> float:
        return float(self.value_batch(np.ascontiguousarray(b)[:, None])[0])

    def value_batch(self, taus: np.ndarray) -> np.ndarray:
        """Upper-bound values for each column belief of taus (S x C)."""
        cb = self.corners @ taus
        best = np.zeros_like(cb)
        if self._built < self._n or len(self._dead) > max(64, self._n // 4):
            self.refresh()
        npts = len(self._ids)
        if npts:
            n_cols = taus.shape[1]
            budget = max(1, 4_000_000 // max(n_cols, 1))
            start = 0
            while start < npts:
                stop = npts
                lo = self._indptr[start]
                while stop > start + 1 and self._indptr[stop] - lo > budget:
                    stop = start + max(1, (stop - start) // 2)
                hi = self._indptr[stop]
                ratios = taus[self._cols[lo:hi], :] / self._flat[lo:hi, None]
                r = np.minimum.reduceat(ratios, self._indptr[start:stop] - lo, axis=0)
                ids = self._ids[start:stop]
                d = self._val[ids] - self._cb[ids]
                np.minimum(best, (d[:, None] * r).min(axis=0), out=best)
                start = stop
        return cb + best

    # -- updates -----------------------------------------------------------------

    def insert(self, b: np.ndarray, value: float, stamp: int) -> None:
        """Record an upper bound value at b, keeping the tightest one seen."""
        supp = np.flatnonzero(b).astype(np.int64)
        data = np.ascontiguousarray(b[supp], dtype=float)
        key = self._key_of(supp, data)
        existing = self._keys.get(key)
        if existing is not None:
            if value < self._val[existing]:
                self._val[existing] = value
            self._stamp[existing] = stamp
            return
        cb = float(self.corners @ b)
        if value - cb >= _USELESS:
            return  # the corner hyperplane is already at least this tight
        if self._n == len(self._val):
            self._grow()
        i = self._n
        self._keys[key] = i
        self._supp.append(supp)
        self._data.append(data)
        self._val[i] = value
        self._cb[i] = cb
        self._stamp[i] = stamp
        self._n += 1
