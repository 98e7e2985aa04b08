"""Per-cell quadtrees (2^d-ary) for exact and approximate range counting.

Trees for many cells live in one flat :class:`QuadForest`; every node owns a
contiguous slice of ``order`` and an explicit ``[lo, hi]`` box.  The root
box is the bounding box of the cell's points, so containment is exact in
floating point (no point sits an ulp outside its node).
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from ._parallel import kernel
from .core import UsageError, as_points

EXACT_MAX_LEVEL = 64


def approx_max_level(rho: float) -> int:
    """Subdivision levels below the root for approximate trees: ceil(log2(1/rho))."""
    if rho >= 1.0:
        return 0
    j = math.ceil(math.log2(1.0 / rho))
    # guard the log against rounding: want the least j with 2**-j <= rho
    while j > 0 and 2.0 ** -(j - 1) <= rho:
        j -= 1
    while 2.0 ** -j > rho:
        j += 1
    return j


def approx_depth_bound(rho: float) -> int:
    """Maximum number of levels of an approximate tree, root included."""
    return 1 + approx_max_level(rho)


@kernel
def _build(pts, order, span_s, span_e, leaf_cap, max_level, codes, tmp,
           nd_lo, nd_hi, nd_s, nd_e, nd_child, nd_nchild, nd_level, used):
    m = span_s.shape[0]
    d = pts.shape[1]
    nb = 1 << d
    for c in prange(m):
        s = span_s[c]
        e = span_e[c]
        if e <= s:
            used[c] = 0
            continue
        r = 2 * s
        for k in range(d):
            nd_lo[r, k] = pts[order[s], k]
            nd_hi[r, k] = pts[order[s], k]
        for i in range(s + 1, e):
            for k in range(d):
                x = pts[order[i], k]
                if x < nd_lo[r, k]:
                    nd_lo[r, k] = x
                if x > nd_hi[r, k]:
                    nd_hi[r, k] = x
        nd_s[r] = s
        nd_e[r] = e
        nd_level[r] = 0
        counts = np.empty(nb, dtype=np.int64)
        pos = np.empty(nb, dtype=np.int64)
        mid = np.empty(d, dtype=np.float64)
        nxt = r + 1
        cur = r
        while cur < nxt:
            v = cur
            cur += 1
            nd_child[v] = -1
            nd_nchild[v] = 0
            a = nd_s[v]
            b = nd_e[v]
            if b - a <= leaf_cap:
                continue
            while nd_level[v] < max_level:
                flat = True
                for k in range(d):
                    mid[k] = nd_lo[v, k] + (nd_hi[v, k] - nd_lo[v, k]) * 0.5
                    if nd_hi[v, k] > nd_lo[v, k]:
                        flat = False
                if flat:
                    break
                counts[:] = 0
                for i in range(a, b):
                    code = 0
                    for k in range(d):
                        code = code * 2 + (1 if pts[order[i], k] >= mid[k] else 0)
                    codes[i] = code
                    counts[code] += 1
                nd_level[v] += 1
                nonempty = 0
                for q in range(nb):
                    if counts[q] > 0:
                        nonempty += 1
                if nonempty == 1:
                    # all points in one sub-cell: descend without creating a node
                    q = codes[a]
                    for k in range(d):
                        if (q >> (d - 1 - k)) & 1:
                            nd_lo[v, k] = mid[k]
                        else:
                            nd_hi[v, k] = mid[k]
                    continue
                acc = a
                for q in range(nb):
                    pos[q] = acc
                    acc += counts[q]
                for i in range(a, b):
                    q = codes[i]
                    tmp[pos[q]] = order[i]
                    pos[q] += 1
                for i in range(a, b):
                    order[i] = tmp[i]
                nd_child[v] = nxt
                acc = a
                for q in range(nb):
                    if counts[q] == 0:
                        continue
                    w = nxt
                    nxt += 1
                    for k in range(d):
                        if (q >> (d - 1 - k)) & 1:
                            nd_lo[w, k] = mid[k]
                            nd_hi[w, k] = nd_hi[v, k]
                        else:
                            nd_lo[w, k] = nd_lo[v, k]
                            nd_hi[w, k] = mid[k]
                    nd_s[w] = acc
                    nd_e[w] = acc + counts[q]
                    acc += counts[q]
                    nd_level[w] = nd_level[v]
                    nd_nchild[v] += 1
                break
        used[c] = nxt - r


@njit(cache=True)
def qt_count(pts, order, weight, nd_lo, nd_hi, nd_s, nd_e, nd_w, nd_child, nd_nchild,
             root, p, r_in2, r_out2, limit, stack, stats):
    """Count weighted points of the tree at *root* near *p*.

    Subtrees farther than ``sqrt(r_in2)`` are pruned; a node wholly within
    ``sqrt(r_out2)`` contributes its whole weight; leaves are scanned against
    ``r_out2``.  Stops as soon as the count reaches ``limit`` (``limit <= 0``
    means never).  ``stats[0]`` accumulates node visits, ``stats[1]`` point
    distance evaluations.
    """
    if root < 0:
        return 0
    d = pts.shape[1]
    count = 0
    top = 0
    stack[0] = root
    while top >= 0:
        v = stack[top]
        top -= 1
        mind = 0.0
        for k in range(d):
            g = max(nd_lo[v, k] - p[k], p[k] - nd_hi[v, k], 0.0)
            mind += g * g
        if mind > r_in2:
            continue
        stats[0] += 1
        maxd = 0.0
        for k in range(d):
            g = max(abs(p[k] - nd_lo[v, k]), abs(p[k] - nd_hi[v, k]))
            maxd += g * g
        if maxd <= r_out2:
            count += nd_w[v]
        elif nd_nchild[v] == 0:
            for i in range(nd_s[v], nd_e[v]):
                x = order[i]
                if weight[x] == 0:
                    continue
                acc = 0.0
                for k in range(d):
                    t = p[k] - pts[x, k]
                    acc += t * t
                stats[1] += 1
                if acc <= r_out2:
                    count += 1
                    if 0 < limit <= count:
                        return count
        else:
            c0 = nd_child[v]
            for j in range(nd_nchild[v] - 1, -1, -1):
                top += 1
                stack[top] = c0 + j
        if 0 < limit <= count:
            return count
    return count


class QuadForest:
    """Quadtrees over disjoint spans of an index array into ``pts``."""

    def __init__(self, pts, order, span_s, span_e, leaf_cap=16, rho=None, weight=None, threads=1):
        self.pts = pts
        self.d = pts.shape[1]
        if self.d > 24:
            raise UsageError("quadtrees are limited to d <= 24")
        self.leaf_cap = int(leaf_cap)
        self.rho = rho
        self.max_level = EXACT_MAX_LEVEL if rho is None else approx_max_level(rho)
        self.order = np.array(order, dtype=np.int64, copy=True)
        span_s = np.asarray(span_s, dtype=np.int64)
        span_e = np.asarray(span_e, dtype=np.int64)
        cap = max(2 * len(self.order), 1)
        d = self.d
        self.nd_lo = np.zeros((cap, d))
        self.nd_hi = np.zeros((cap, d))
        self.nd_s = np.zeros(cap, np.int64)
        self.nd_e = np.zeros(cap, np.int64)
        self.nd_child = np.full(cap, -1, np.int64)
        self.nd_nchild = np.zeros(cap, np.int64)
        self.nd_level = np.zeros(cap, np.int64)
        self.used = np.zeros(len(span_s), np.int64)
        codes = np.empty(len(self.order), np.int64)
        tmp = np.empty(len(self.order), np.int64)
        _build(threads, pts, self.order, span_s, span_e, self.leaf_cap, self.max_level, codes, tmp,
               self.nd_lo, self.nd_hi, self.nd_s, self.nd_e, self.nd_child, self.nd_nchild,
               self.nd_level, self.used)
        self.roots = np.where(span_e > span_s, 2 * span_s, -1).astype(np.int64)
        self.weight = np.ones(len(pts), np.uint8) if weight is None else np.asarray(weight, np.uint8)
        self.nd_w = self._node_weights()

    def _node_weights(self):
        w = self.weight[self.order].astype(np.int64)
        pre = np.zeros(len(w) + 1, np.int64)
        np.cumsum(w, out=pre[1:])
        return pre[self.nd_e] - pre[self.nd_s]

    @property
    def ones(self):
        return np.ones(len(self.weight), np.uint8)

    def arrays(self):
        return (self.pts, self.order, self.weight, self.nd_lo, self.nd_hi, self.nd_s, self.nd_e,
                self.nd_w, self.nd_child, self.nd_nchild)

    @property
    def max_nodes(self) -> int:
        return int(self.used.max()) if len(self.used) else 0


class Quadtree:
    """Quadtree over the points of a single cell."""

    def __init__(self, forest: QuadForest, cell: int = 0, eps: float | None = None):
        self.forest = forest
        self.cell = cell
        self.eps = eps
        self.root = int(forest.roots[cell])
        self.rho = forest.rho

    @property
    def mode(self) -> str:
        return "exact" if self.rho is None else "approx"

    def nodes(self) -> np.ndarray:
        """Ids of this tree's nodes in breadth-first order."""
        if self.root < 0:
            return np.zeros(0, np.int64)
        return np.arange(self.root, self.root + self.forest.used[self.cell])

    def leaves(self) -> np.ndarray:
        nodes = self.nodes()
        return nodes[self.forest.nd_nchild[nodes] == 0]

    @property
    def depth(self) -> int:
        f = self.forest
        nodes = self.nodes()
        depth = {int(self.root): 1}
        for v in nodes:
            for j in range(f.nd_nchild[v]):
                depth[int(f.nd_child[v] + j)] = depth[int(v)] + 1
        return max(depth.values())

    @property
    def count(self) -> int:
        f = self.forest
        return int(f.nd_e[self.root] - f.nd_s[self.root]) if self.root >= 0 else 0


def build_quadtree(points, eps: float, leaf_cap: int = 16, rho: float | None = None,
                   core=None) -> Quadtree:
    """Build one tree over *points* (the members of a single cell).

    ``rho`` selects the approximate tree, whose subdivision stops at
    ``ceil(log2(1/rho))`` levels below the root.  ``core`` optionally flags
    the points counted by ``core_only`` queries.
    """
    pts = as_points(points)
    if len(pts) == 0:
        raise UsageError("a quadtree needs at least one point")
    if rho is not None and not rho > 0:
        raise UsageError("rho must be positive")
    side = eps / math.sqrt(pts.shape[1])
    if np.any(pts.max(axis=0) - pts.min(axis=0) > side * (1 + 1e-12)):
        raise UsageError("points do not fit in one cell of side eps/sqrt(d)")
    weight = None if core is None else np.asarray(core, dtype=bool)
    forest = QuadForest(pts, np.arange(len(pts)), [0], [len(pts)], leaf_cap=leaf_cap, rho=rho,
                        weight=weight)
    return Quadtree(forest, 0, eps)


def _run(q: Quadtree, p, r_in2, r_out2, limit, stats, core_only=False):
    f = q.forest
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (f.d,):
        raise UsageError(f"query point must have {f.d} coordinates")
    arrays = list(f.arrays())
    if not core_only:
        arrays[2] = f.ones
        arrays[7] = f.nd_e - f.nd_s
    st = np.zeros(2, np.int64)
    stack = np.empty(f.max_nodes + 1, np.int64)
    res = qt_count(*arrays, q.root, p, r_in2, r_out2, limit, stack, st)
    if stats is not None:
        stats["visits"] = stats.get("visits", 0) + int(st[0])
        stats["distances"] = stats.get("distances", 0) + int(st[1])
    return int(res)


def qt_range_count_exact(q: Quadtree, p, eps: float, mode: str = "full", core_only: bool = False,
                         stats: dict | None = None) -> int:
    """Number of the cell's points within eps of *p*.

    ``mode="nonzero"`` may stop at any positive count.  With ``core_only``
    only points flagged ``core`` at build time are counted; otherwise all.
    """
    if q.mode != "exact":
        raise UsageError("qt_range_count_exact needs a tree built in exact mode")
    if mode not in ("full", "nonzero"):
        raise UsageError(f"unknown mode {mode!r}")
    eps2 = eps * eps
    return _run(q, p, eps2, eps2, 1 if mode == "nonzero" else 0, stats, core_only)


def qt_range_count_approx(q: Quadtree, p, eps: float, rho: float, mode: str = "full",
                          stats: dict | None = None) -> int:
    """A count between the points within eps and those within eps*(1+rho)."""
    if q.mode != "approx" or q.rho != rho:
        raise UsageError("qt_range_count_approx needs a tree built in approximate mode with the same rho")
    if mode not in ("full", "nonzero"):
        raise UsageError(f"unknown mode {mode!r}")
    r_out = eps * (1.0 + rho)
    return _run(q, p, eps * eps, r_out * r_out, 1 if mode == "nonzero" else 0, stats, True)
