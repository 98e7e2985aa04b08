"""Cell decomposition: the lattice grid (any dimension) and the 2-D box method.

Both produce a :class:`Grid`: point indices grouped into contiguous spans,
one span per non-empty cell, plus a lazily filled neighbour table.
"""
from __future__ import annotations

import itertools
import math
import threading

import numpy as np
from numba import njit, prange

from ._parallel import kernel
from .core import UsageError, as_dataset, cell_keys, cell_side

_MAX_CODE = 1 << 62


class Grid:
    """Non-empty cells of a point set.

    Cell ``c`` owns ``perm[starts[c]:starts[c+1]]``.  Lattice cells are
    ordered lexicographically by key; box cells by (strip, y).
    """

    def __init__(self, method, eps, points, perm, starts, keys=None, origin=None, strips=None):
        self.method = method
        self.eps = float(eps)
        self.points = points
        self.d = points.shape[1]
        self.perm = perm
        self.starts = starts
        self.keys = keys
        self.origin = origin
        self.strips = strips
        if len(perm):
            ordered = points[perm]
            self.box_lo = np.minimum.reduceat(ordered, starts[:-1], axis=0)
            self.box_hi = np.maximum.reduceat(ordered, starts[:-1], axis=0)
        else:
            self.box_lo = self.box_hi = np.zeros((0, self.d))
        self._codes = None
        self._strides = None
        self._extent = None
        if keys is not None and len(keys):
            extent = keys.max(axis=0) + 1
            if math.prod(int(x) for x in extent) < _MAX_CODE:
                strides = np.ones(self.d, dtype=np.int64)
                for k in range(self.d - 2, -1, -1):
                    strides[k] = strides[k + 1] * extent[k + 1]
                self._codes = keys @ strides
                self._strides = strides
            self._extent = extent.astype(np.int64)
        self._nbr = None
        self._nbr_lock = threading.Lock()
        self._kdtree = None

    def __len__(self) -> int:
        return len(self.starts) - 1

    @property
    def num_cells(self) -> int:
        return len(self.starts) - 1

    def counts(self) -> np.ndarray:
        return np.diff(self.starts)

    def members(self, c: int) -> np.ndarray:
        return self.perm[self.starts[c]:self.starts[c + 1]]

    def cell_box(self, c: int) -> tuple[np.ndarray, np.ndarray]:
        """Lattice box of a grid cell, or the point bounding box of a box cell."""
        if self.method == "grid":
            side = cell_side(self.eps, self.d)
            lo = self.origin + self.keys[c] * side
            return lo, lo + side
        return self.box_lo[c], self.box_hi[c]

    @property
    def encodable(self) -> bool:
        return self._codes is not None

    def find_cell(self, key) -> int:
        """Cell id of lattice *key*, or -1 when that cell is empty."""
        key = np.asarray(key, dtype=np.int64)
        if self._codes is not None:
            if np.any(key < 0) or np.any(key >= self._extent):
                return -1
            code = int(key @ self._strides)
            j = int(np.searchsorted(self._codes, code))
            return j if j < len(self._codes) and self._codes[j] == code else -1
        hits = np.flatnonzero(np.all(self.keys == key, axis=1))
        return int(hits[0]) if len(hits) else -1

    def neighbor_table(self, threads: int = 1, leaf_cap: int = 16):
        """CSR ``(ptr, idx)`` of neighbour cell ids, computed once and cached."""
        if self._nbr is None:
            with self._nbr_lock:
                if self._nbr is None:
                    self._nbr = self._compute_neighbors(threads, leaf_cap)
        return self._nbr

    def _compute_neighbors(self, threads, leaf_cap):
        m = self.num_cells
        if m == 0:
            return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int32)
        if self.method == "box":
            args = (self.strips, self.box_lo, self.box_hi, self.eps * self.eps)
            cnt = np.zeros(m, dtype=np.int64)
            _box_neighbors(threads, *args, cnt, np.zeros(1, np.int64), np.zeros(0, np.int32), False)
            ptr = _ptr_from_counts(cnt)
            idx = np.empty(ptr[-1], dtype=np.int32)
            _box_neighbors(threads, *args, cnt, ptr, idx, True)
            return ptr, idx
        if self.d >= 4 or not self.encodable:
            from .kdtree import build_cell_kdtree, kd_neighbor_table

            if self._kdtree is None:
                self._kdtree = build_cell_kdtree(self, leaf_cap=leaf_cap)
            return kd_neighbor_table(self._kdtree, threads)
        offsets = lattice_offsets(self.d)
        cnt = np.zeros(m, dtype=np.int64)
        args = (self.keys, self._codes, self._strides, self._extent, offsets)
        _enum_neighbors(threads, *args, cnt, np.zeros(1, np.int64), np.zeros(0, np.int32), False)
        ptr = _ptr_from_counts(cnt)
        idx = np.empty(ptr[-1], dtype=np.int32)
        _enum_neighbors(threads, *args, cnt, ptr, idx, True)
        return ptr, idx

    def __repr__(self) -> str:
        return f"Grid(method={self.method!r}, cells={self.num_cells}, d={self.d})"


def _ptr_from_counts(cnt):
    ptr = np.zeros(len(cnt) + 1, dtype=np.int64)
    np.cumsum(cnt, out=ptr[1:])
    return ptr


def lattice_reach(d: int) -> int:
    """Largest per-axis offset that can still hold a point within eps."""
    r = math.isqrt(d)
    return r if r * r == d else r + 1


def lattice_offsets(d: int) -> np.ndarray:
    """Non-zero offsets whose half-open cells can hold points within eps, lexicographic.

    Offset ``D`` qualifies iff ``sum(max(|D_k| - 1, 0)**2) < d``: the gap
    between the boxes is then strictly below the cell diagonal.
    """
    r = lattice_reach(d)
    out = []
    for off in itertools.product(range(-r, r + 1), repeat=d):
        if not any(off):
            continue
        if sum(max(abs(o) - 1, 0) ** 2 for o in off) < d:
            out.append(off)
    return np.array(out, dtype=np.int64).reshape(-1, d)


def lattice_gap2(a, b) -> int:
    """Squared box gap of two lattice keys, in units of the cell side."""
    return int(sum(max(abs(int(x) - int(y)) - 1, 0) ** 2 for x, y in zip(a, b)))


@kernel
def _enum_neighbors(keys, codes, strides, extent, offsets, cnt, ptr, idx, fill):
    m, d = keys.shape
    for c in prange(m):
        w = ptr[c] if fill else 0
        found = 0
        for o in range(offsets.shape[0]):
            code = 0
            ok = True
            for k in range(d):
                v = keys[c, k] + offsets[o, k]
                if v < 0 or v >= extent[k]:
                    ok = False
                    break
                code += v * strides[k]
            if not ok:
                continue
            j = np.searchsorted(codes, code)
            if j < m and codes[j] == code:
                if fill:
                    idx[w + found] = j
                found += 1
        if not fill:
            cnt[c] = found


@kernel
def _box_neighbors(strips, lo, hi, eps2, cnt, ptr, idx, fill):
    m = strips.shape[0]
    eps = np.sqrt(eps2)
    nstrips = strips[m - 1] + 1
    # first cell of every strip
    sb = np.zeros(nstrips + 1, dtype=np.int64)
    for c in range(m):
        sb[strips[c] + 1] = c + 1
    for s in range(1, nstrips + 1):
        if sb[s] < sb[s - 1]:
            sb[s] = sb[s - 1]
    for c in prange(m):
        s = strips[c]
        w = ptr[c] if fill else 0
        found = 0
        for t in range(max(s - 2, 0), min(s + 2, nstrips - 1) + 1):
            a, b = sb[t], sb[t + 1]
            # cells of a strip are disjoint and sorted in y, so hi[:, 1] is sorted too
            j = a + np.searchsorted(hi[a:b, 1], lo[c, 1] - eps)
            while j < b and lo[j, 1] <= hi[c, 1] + eps:
                if j != c:
                    g2 = 0.0
                    for k in range(lo.shape[1]):
                        gap = max(lo[j, k] - hi[c, k], lo[c, k] - hi[j, k], 0.0)
                        g2 += gap * gap
                    if g2 <= eps2:
                        if fill:
                            idx[w + found] = j
                        found += 1
                j += 1
        if not fill:
            cnt[c] = found


def build_grid(ds, eps: float) -> Grid:
    """Group points by their lattice cell of side ``eps/sqrt(d)``."""
    ds = as_dataset(ds)
    if not eps > 0:
        raise UsageError("eps must be positive")
    pts = ds.points
    if ds.n == 0:
        return Grid("grid", eps, pts, np.zeros(0, np.int64), np.zeros(1, np.int64),
                    keys=np.zeros((0, ds.d), np.int64), origin=ds.lo)
    keys = cell_keys(pts, eps, ds.lo)
    extent = keys.max(axis=0) + 1
    if math.prod(int(x) for x in extent) < _MAX_CODE:
        strides = np.ones(ds.d, dtype=np.int64)
        for k in range(ds.d - 2, -1, -1):
            strides[k] = strides[k + 1] * extent[k + 1]
        perm = np.argsort(keys @ strides, kind="stable")
    else:
        perm = np.lexsort(keys.T[::-1])
    sk = keys[perm]
    brk = np.flatnonzero(np.any(sk[1:] != sk[:-1], axis=1)) + 1
    starts = np.concatenate(([0], brk, [ds.n])).astype(np.int64)
    return Grid("grid", eps, pts, perm.astype(np.int64), starts, keys=sk[starts[:-1]], origin=ds.lo)


@njit(cache=True)
def _scan_segments(values, seg_starts, width, out):
    nseg = len(seg_starts) - 1
    sid = -1
    for s in range(nseg):
        a, b = seg_starts[s], seg_starts[s + 1]
        start = 0.0
        for i in range(a, b):
            if i == a or values[i] > start + width:
                sid += 1
                start = values[i]
            out[i] = sid


def _list_rank_segments(values, seg_starts, width):
    """Pointer-jumping strip assignment; identical output to the sequential scan."""
    n = len(values)
    seg_id = np.repeat(np.arange(len(seg_starts) - 1), np.diff(seg_starts))
    seg_end = seg_starts[1:][seg_id]
    # parent: first later point of the same segment lying more than width ahead
    parent = np.empty(n + 1, dtype=np.int64)
    for s in range(len(seg_starts) - 1):
        a, b = seg_starts[s], seg_starts[s + 1]
        parent[a:b] = a + np.searchsorted(values[a:b], values[a:b] + width, side="right")
    parent[:n] = np.where(parent[:n] >= seg_end, n, parent[:n])
    parent[n] = n
    mark = np.zeros(n + 1, dtype=np.int8)
    mark[seg_starts[:-1][np.diff(seg_starts) > 0]] = 1
    while True:
        nxt = mark.copy()
        src = np.flatnonzero(mark)
        nxt[parent[src]] = 1
        nxt[n] = 0
        jumped = parent[parent]
        if np.array_equal(jumped, parent) and np.array_equal(nxt, mark):
            break
        mark, parent = nxt, jumped
    return np.cumsum(mark[:n]).astype(np.int64) - 1


def assign_strips(sorted_coord, width: float, strategy: str = "scan") -> np.ndarray:
    """Strip id per element of an ascending sequence.

    A strip opens at its first element and closes before the first element
    exceeding ``start + width``.  ``strategy="list-ranking"`` computes the
    same ids by pointer jumping.
    """
    values = np.asarray(sorted_coord, dtype=np.float64)
    if values.ndim != 1:
        raise UsageError("assign_strips expects a 1-D sequence")
    if not width > 0:
        raise UsageError("width must be positive")
    if np.any(values[1:] < values[:-1]):
        raise UsageError("assign_strips input must be sorted ascending")
    return _assign_segments(values, np.array([0, len(values)], dtype=np.int64), width, strategy)


def _assign_segments(values, seg_starts, width, strategy):
    if strategy == "scan":
        out = np.empty(len(values), dtype=np.int64)
        _scan_segments(values, seg_starts, float(width), out)
        return out
    if strategy == "list-ranking":
        return _list_rank_segments(values, seg_starts, float(width))
    raise UsageError(f"unknown strip strategy {strategy!r}")


def build_boxes_2d(ds, eps: float, strategy: str = "scan") -> Grid:
    """Box cells: x-strips of width ``eps/sqrt(2)``, then y-boxes within each strip."""
    ds = as_dataset(ds)
    if ds.d != 2:
        raise UsageError(f"the box method needs d=2, got d={ds.d}")
    if not eps > 0:
        raise UsageError("eps must be positive")
    pts = ds.points
    n = ds.n
    if n == 0:
        return Grid("box", eps, pts, np.zeros(0, np.int64), np.zeros(1, np.int64),
                    strips=np.zeros(0, np.int64))
    width = eps / math.sqrt(2.0)
    by_x = np.lexsort((pts[:, 1], pts[:, 0]))
    xstrip = _assign_segments(pts[by_x, 0], np.array([0, n], dtype=np.int64), width, strategy)
    # xstrip is non-decreasing along by_x, so it stays aligned after the (strip, y) sort
    order = by_x[np.lexsort((pts[by_x, 0], pts[by_x, 1], xstrip))]
    xs = xstrip
    seg = np.concatenate(([0], np.flatnonzero(xs[1:] != xs[:-1]) + 1, [n])).astype(np.int64)
    ybox = _assign_segments(pts[order, 1], seg, width, strategy)
    brk = np.flatnonzero(ybox[1:] != ybox[:-1]) + 1
    starts = np.concatenate(([0], brk, [n])).astype(np.int64)
    return Grid("box", eps, pts, order.astype(np.int64), starts, strips=xs[starts[:-1]])


def neighbor_cells(g: Grid, c: int, eps: float | None = None, threads: int = 1) -> list[int]:
    """Ids of the cells that can hold a point within eps of a point of cell *c*, sorted."""
    if eps is not None and not math.isclose(eps, g.eps, rel_tol=0, abs_tol=0):
        raise UsageError("neighbor_cells must use the eps the grid was built with")
    if not 0 <= c < g.num_cells:
        raise UsageError(f"cell {c} out of range")
    ptr, idx = g.neighbor_table(threads)
    return [int(x) for x in idx[ptr[c]:ptr[c + 1]]]
