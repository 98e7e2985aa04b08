"""k-d tree over lattice cells, used for neighbour finding when d >= 4.

Pruning works on integer keys: a subtree is skipped when the squared gap
between its key box and the query key (in units of the cell side) is at
least ``d``.  That is the same predicate the offset enumeration uses, so
both paths return identical neighbour sets.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from ._parallel import kernel
from .core import UsageError


@dataclass(frozen=True)
class CellKdTree:
    keys: np.ndarray        # (m, d) lattice keys of the cells
    order: np.ndarray       # cell ids, leaves own contiguous slices
    start: np.ndarray
    end: np.ndarray
    left: np.ndarray        # -1 marks a leaf
    right: np.ndarray
    lo: np.ndarray          # (nodes, d) key bounding boxes
    hi: np.ndarray
    leaf_cap: int

    @property
    def num_nodes(self) -> int:
        return len(self.start)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.num_nodes, dtype=np.int64)
        depth[0] = 1
        for v in range(self.num_nodes):
            if self.left[v] >= 0:
                depth[self.left[v]] = depth[self.right[v]] = depth[v] + 1
        return int(depth.max())


@njit(cache=True)
def _build(keys, leaf_cap, order, start, end, left, right, lo, hi):
    m, d = keys.shape
    start[0] = 0
    end[0] = m
    nodes = 1
    v = 0
    while v < nodes:
        s, e = start[v], end[v]
        for k in range(d):
            lo[v, k] = keys[order[s], k]
            hi[v, k] = keys[order[s], k]
        for i in range(s + 1, e):
            for k in range(d):
                x = keys[order[i], k]
                if x < lo[v, k]:
                    lo[v, k] = x
                if x > hi[v, k]:
                    hi[v, k] = x
        left[v] = -1
        right[v] = -1
        if e - s > leaf_cap:
            axis = 0
            for k in range(1, d):
                if hi[v, k] - lo[v, k] > hi[v, axis] - lo[v, axis]:
                    axis = k
            vals = np.empty(e - s, dtype=np.int64)
            for i in range(s, e):
                vals[i - s] = keys[order[i], axis]
            idx = np.argsort(vals, kind="mergesort")
            seg = order[s:e].copy()
            for i in range(e - s):
                order[s + i] = seg[idx[i]]
            mid = (s + e) // 2
            left[v] = nodes
            right[v] = nodes + 1
            start[nodes], end[nodes] = s, mid
            start[nodes + 1], end[nodes + 1] = mid, e
            nodes += 2
        v += 1
    return nodes


def build_cell_kdtree(grid, leaf_cap: int = 16) -> CellKdTree:
    """Median split on the widest key axis, recursively, until ``leaf_cap`` cells remain."""
    if grid.keys is None:
        raise UsageError("the cell k-d tree needs lattice cells")
    if grid.num_cells == 0:
        raise UsageError("cannot build a k-d tree over an empty grid")
    if leaf_cap < 1:
        raise UsageError("leaf_cap must be at least 1")
    keys = np.ascontiguousarray(grid.keys, dtype=np.int64)
    m, d = keys.shape
    cap = 2 * m + 1
    order = np.arange(m, dtype=np.int64)
    start = np.empty(cap, np.int64)
    end = np.empty(cap, np.int64)
    left = np.empty(cap, np.int64)
    right = np.empty(cap, np.int64)
    lo = np.empty((cap, d), np.int64)
    hi = np.empty((cap, d), np.int64)
    n = _build(keys, int(leaf_cap), order, start, end, left, right, lo, hi)
    return CellKdTree(keys, order, start[:n], end[:n], left[:n], right[:n], lo[:n], hi[:n], int(leaf_cap))


@njit(cache=True)
def _query(keys, order, start, end, left, right, lo, hi, c, stack, out):
    d = keys.shape[1]
    top = 0
    stack[0] = 0
    found = 0
    while top >= 0:
        v = stack[top]
        top -= 1
        g2 = 0
        for k in range(d):
            q = keys[c, k]
            gap = max(lo[v, k] - q - 1, q - hi[v, k] - 1, 0)
            g2 += gap * gap
        if g2 >= d:
            continue
        if left[v] < 0:
            for i in range(start[v], end[v]):
                h = order[i]
                if h == c:
                    continue
                g2 = 0
                for k in range(d):
                    gap = max(abs(keys[h, k] - keys[c, k]) - 1, 0)
                    g2 += gap * gap
                if g2 < d:
                    out[found] = h
                    found += 1
        else:
            top += 1
            stack[top] = right[v]
            top += 1
            stack[top] = left[v]
    out[:found].sort()
    return found


@kernel
def _table(keys, order, start, end, left, right, lo, hi, bound, cnt, ptr, idx, fill):
    m = keys.shape[0]
    for c in prange(m):
        stack = np.empty(start.shape[0] + 1, dtype=np.int64)
        out = np.empty(bound, dtype=np.int64)
        f = _query(keys, order, start, end, left, right, lo, hi, c, stack, out)
        if fill:
            for i in range(f):
                idx[ptr[c] + i] = out[i]
        else:
            cnt[c] = f


def _arrays(t):
    return (t.keys, t.order, t.start, t.end, t.left, t.right, t.lo, t.hi)


def kd_range_cells(t: CellKdTree, c: int) -> list[int]:
    """Cells within reach of cell *c* (box gap strictly below eps), sorted, excluding *c*."""
    m = len(t.keys)
    if not 0 <= c < m:
        raise UsageError(f"cell {c} out of range")
    stack = np.empty(t.num_nodes + 1, dtype=np.int64)
    out = np.empty(m, dtype=np.int64)
    f = _query(*_arrays(t), int(c), stack, out)
    return [int(x) for x in out[:f]]


def kd_neighbor_table(t: CellKdTree, threads: int = 1):
    from .cells import lattice_reach

    m, d = t.keys.shape
    bound = m if d > 12 else min(m, (2 * lattice_reach(d) + 1) ** d)
    cnt = np.zeros(m, dtype=np.int64)
    _table(threads, *_arrays(t), bound, cnt, np.zeros(1, np.int64), np.zeros(0, np.int32), False)
    ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(cnt, out=ptr[1:])
    idx = np.empty(ptr[-1], dtype=np.int32)
    _table(threads, *_arrays(t), bound, cnt, ptr, idx, True)
    return ptr, idx
