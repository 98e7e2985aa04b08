"""Lock-free union-find over cell ids.

``link`` hangs the smaller root under the larger one with a single
compare-and-swap and retries when another thread got there first; ``find``
halves paths with CAS as well.  Parents only ever point to larger ids, so
the forest stays acyclic under any interleaving.
"""
from __future__ import annotations

import numpy as np
from numba import njit, prange

from ._parallel import atomic_cas, kernel


@njit(cache=True)
def uf_find(parent, x):
    x = np.int64(x)
    while True:
        p = parent[x]
        if p == x:
            return x
        gp = parent[p]
        if gp != p:
            atomic_cas(parent, x, p, gp)
        x = gp


@njit(cache=True)
def uf_link(parent, a, b):
    """Merge the sets of a and b; False when they were already one set."""
    a = np.int64(a)
    b = np.int64(b)
    while True:
        ra = uf_find(parent, a)
        rb = uf_find(parent, b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        if atomic_cas(parent, ra, ra, rb) == ra:
            return True


@kernel
def _link_pairs(parent, a, b):
    for i in prange(a.shape[0]):
        uf_link(parent, a[i], b[i])


@kernel
def _roots(parent, out):
    for i in prange(parent.shape[0]):
        out[i] = uf_find(parent, i)


class UnionFind:
    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.parent)

    def find(self, x: int) -> int:
        return int(uf_find(self.parent, x))

    def link(self, a: int, b: int) -> bool:
        return bool(uf_link(self.parent, a, b))

    def link_many(self, a, b, threads: int = 1) -> None:
        """Link every pair ``(a[i], b[i])``, concurrently when ``threads > 1``."""
        _link_pairs(threads, self.parent, np.asarray(a, np.int64), np.asarray(b, np.int64))

    def roots(self, threads: int = 1) -> np.ndarray:
        out = np.empty(len(self.parent), np.int64)
        _roots(threads, self.parent, out)
        return out
