"""The clustering pipeline: cells, core marking, cell-graph connectivity, border assignment.

Work happens in *position space*: positions ``0..n-1`` enumerate points in
cell order, so every cell owns a contiguous slice of a coordinate copy.
Core points are then compacted into a second cell-ordered array.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit, prange

from ._parallel import kernel, max_threads
from .cells import Grid, build_boxes_2d, build_grid
from .core import Clustering, Params, UsageError, as_dataset, as_points, normalize_labels
from .quadtree import QuadForest, qt_count
from .unionfind import uf_find, uf_link
from .usec import wavefront_query, wavefront_sweep

CELL_METHODS = ("grid", "box2d")
MARK_CORE = ("scan", "quadtree")
CONNECTIVITY = ("bcp", "bcp-quadtree", "usec2d", "approx-quadtree")

METHODS = {
    "exact": dict(mark_core="scan", connectivity="bcp"),
    "exact-qt": dict(mark_core="quadtree", connectivity="bcp"),
    "approx": dict(mark_core="scan", connectivity="approx-quadtree"),
    "approx-qt": dict(mark_core="quadtree", connectivity="approx-quadtree"),
    "2d-grid-bcp": dict(connectivity="bcp"),
    "2d-grid-usec": dict(connectivity="usec2d"),
    "2d-box-bcp": dict(cell_method="box2d", connectivity="bcp"),
    "2d-box-usec": dict(cell_method="box2d", connectivity="usec2d"),
}

DEFAULT_RHO = 0.01


@dataclass(frozen=True)
class MethodConfig:
    cell_method: str = "grid"
    mark_core: str = "scan"
    connectivity: str = "bcp"
    bucketing: bool = False
    block_size: int = 32
    leaf_cap: int = 16
    threads: int = 0            # 0: all hardware threads
    batch_size: int | None = None
    name: str | None = None

    @classmethod
    def from_method(cls, name: str, **overrides) -> "MethodConfig":
        if name not in METHODS:
            raise UsageError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
        return cls(name=name, **{**METHODS[name], **overrides})

    @property
    def approximate(self) -> bool:
        return self.connectivity == "approx-quadtree"

    @property
    def effective_threads(self) -> int:
        t = self.threads if self.threads > 0 else (os.cpu_count() or 1)
        return max(1, min(t, max_threads()))

    @property
    def effective_batch_size(self) -> int:
        return self.batch_size if self.batch_size else 8 * self.effective_threads

    def validate(self, d: int, params: Params) -> None:
        if self.cell_method not in CELL_METHODS:
            raise UsageError(f"cell_method must be one of {CELL_METHODS}")
        if self.mark_core not in MARK_CORE:
            raise UsageError(f"mark_core must be one of {MARK_CORE}")
        if self.connectivity not in CONNECTIVITY:
            raise UsageError(f"connectivity must be one of {CONNECTIVITY}")
        if self.block_size < 1 or self.leaf_cap < 1:
            raise UsageError("block_size and leaf_cap must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise UsageError("batch_size must be positive")
        if self.threads < 0:
            raise UsageError("threads must be non-negative")
        needs_2d = (self.cell_method == "box2d" or self.connectivity == "usec2d"
                    or (self.name or "").startswith("2d-"))
        if needs_2d and d != 2:
            raise UsageError(f"method {self.name or self.connectivity} needs d=2, data has d={d}")
        if self.approximate and params.rho is None:
            raise UsageError("approximate connectivity needs rho")
        if (self.mark_core == "quadtree" or "quadtree" in self.connectivity) and d > 24:
            raise UsageError("quadtree methods support d <= 24")


@dataclass
class RunStats:
    """Timings (seconds) and work counters filled in by :func:`run_dbscan`."""

    timings: dict = field(default_factory=dict)
    connectivity_queries: int = 0
    distance_computations: int = 0
    quadtree_visits: int = 0
    threads: int = 1
    num_cells: int = 0
    nbr_ptr: np.ndarray | None = field(default=None, repr=False)
    nbr_idx: np.ndarray | None = field(default=None, repr=False)
    pair_queries: np.ndarray | None = field(default=None, repr=False)

    def queries_per_pair(self) -> dict[tuple[int, int], int]:
        """Connectivity queries issued per unordered cell pair (both directions summed)."""
        out: dict[tuple[int, int], int] = {}
        if self.pair_queries is None:
            return out
        for g in range(len(self.nbr_ptr) - 1):
            for t in range(self.nbr_ptr[g], self.nbr_ptr[g + 1]):
                k = int(self.pair_queries[t])
                if k:
                    h = int(self.nbr_idx[t])
                    key = (min(g, h), max(g, h))
                    out[key] = out.get(key, 0) + k
        return out


# ---------------------------------------------------------------- kernels


@njit(cache=True, inline="always")
def _dist2(a, i, b, j):
    acc = 0.0
    for k in range(a.shape[1]):
        t = a[i, k] - b[j, k]
        acc += t * t
    return acc


@njit(cache=True, inline="always")
def _box_dist2(a, i, lo, hi, c):
    acc = 0.0
    for k in range(a.shape[1]):
        g = max(lo[c, k] - a[i, k], a[i, k] - hi[c, k], 0.0)
        acc += g * g
    return acc


@kernel
def _mark_core_scan(cp, starts, nptr, nidx, min_pts, eps2, core, dists):
    m = starts.shape[0] - 1
    for c in prange(m):
        s = starts[c]
        e = starts[c + 1]
        size = e - s
        if size >= min_pts:
            for i in range(s, e):
                core[i] = 1
            continue
        dc = 0
        for i in range(s, e):
            cnt = size
            for t in range(nptr[c], nptr[c + 1]):
                if cnt >= min_pts:
                    break
                h = nidx[t]
                for j in range(starts[h], starts[h + 1]):
                    dc += 1
                    if _dist2(cp, i, cp, j) <= eps2:
                        cnt += 1
                        if cnt >= min_pts:
                            break
            if cnt >= min_pts:
                core[i] = 1
        dists[c] = dc


@kernel
def _mark_core_qt(cp, starts, nptr, nidx, min_pts, eps2, core, dists, visits,
                  q_pts, q_order, q_w, q_lo, q_hi, q_s, q_e, q_nw, q_child, q_nchild, roots, max_nodes):
    m = starts.shape[0] - 1
    for c in prange(m):
        s = starts[c]
        e = starts[c + 1]
        size = e - s
        if size >= min_pts:
            for i in range(s, e):
                core[i] = 1
            continue
        stack = np.empty(max_nodes + 1, dtype=np.int64)
        st = np.zeros(2, dtype=np.int64)
        for i in range(s, e):
            cnt = size
            for t in range(nptr[c], nptr[c + 1]):
                if cnt >= min_pts:
                    break
                h = nidx[t]
                cnt += qt_count(q_pts, q_order, q_w, q_lo, q_hi, q_s, q_e, q_nw, q_child, q_nchild,
                                roots[h], cp[i], eps2, eps2, min_pts - cnt, stack, st)
            if cnt >= min_pts:
                core[i] = 1
        visits[c] = st[0]
        dists[c] = st[1]


@njit(cache=True)
def _bcp(P, a0, a1, b0, b1, lo, hi, ga, gb, eps2, block):
    """Block-wise closest-pair test between core spans; returns (hit, distances)."""
    fa = np.empty(a1 - a0, dtype=np.int64)
    na = 0
    for i in range(a0, a1):
        if _box_dist2(P, i, lo, hi, gb) <= eps2:
            fa[na] = i
            na += 1
    if na == 0:
        return False, 0
    fb = np.empty(b1 - b0, dtype=np.int64)
    nb = 0
    for j in range(b0, b1):
        if _box_dist2(P, j, lo, hi, ga) <= eps2:
            fb[nb] = j
            nb += 1
    dist = 0
    for ia in range(0, na, block):
        ea = min(ia + block, na)
        for ib in range(0, nb, block):
            eb = min(ib + block, nb)
            hit = False
            for x in range(ia, ea):
                for y in range(ib, eb):
                    dist += 1
                    if _dist2(P, fa[x], P, fb[y]) <= eps2:
                        hit = True
            if hit:
                return True, dist
    return False, dist


@njit(cache=True)
def _usec_pair(g, h, cs, lo, hi, dup, TU, TV, Tc, Tlo, Thi, Tn, LU, LV, Lc, Llo, Lhi, Ln, eps2):
    """USEC answer for cells g, h: 1 connected, 0 not, -1 no usable wavefront."""
    if lo[h, 1] >= hi[g, 1]:
        top, gen, qry = True, g, h
    elif lo[g, 1] >= hi[h, 1]:
        top, gen, qry = True, h, g
    elif hi[h, 0] <= lo[g, 0]:
        top, gen, qry = False, g, h
    elif hi[g, 0] <= lo[h, 0]:
        top, gen, qry = False, h, g
    else:
        return -1
    if dup[gen]:
        return -1
    s, e = cs[gen], cs[gen + 1]
    qs, qe = cs[qry], cs[qry + 1]
    if top:
        ok = wavefront_query(TU[s:e], TV[s:e], Tc[s:e], Tlo[s:e], Thi[s:e], Tn[gen],
                             TU[qs:qe], TV[qs:qe], eps2)
    else:
        ok = wavefront_query(LU[s:e], LV[s:e], Lc[s:e], Llo[s:e], Lhi[s:e], Ln[gen],
                             LU[qs:qe], LV[qs:qe], eps2)
    return 1 if ok else 0


@kernel
def _usec_prepare(P, cs, eps, TU, TV, Tc, Tlo, Thi, Tn, LU, LV, Lc, Llo, Lhi, Ln, dup):
    m = cs.shape[0] - 1
    for c in prange(m):
        s = cs[c]
        e = cs[c + 1]
        if e == s:
            continue
        for frame in range(2):
            if frame == 0:
                u = P[s:e, 0].copy()
                v = P[s:e, 1].copy()
            else:
                u = P[s:e, 1].copy()
                v = -P[s:e, 0]
            o1 = np.argsort(v, kind="mergesort")
            o2 = np.argsort(u[o1], kind="mergesort")
            o = o1[o2]
            U = TU if frame == 0 else LU
            V = TV if frame == 0 else LV
            for i in range(e - s):
                U[s + i] = u[o[i]]
                V[s + i] = v[o[i]]
            for i in range(s + 1, e):
                if U[i] == U[i - 1] and V[i] == V[i - 1]:
                    dup[c] = 1
            if frame == 0:
                Tn[c] = wavefront_sweep(TU[s:e], TV[s:e], eps, Tc[s:e], Tlo[s:e], Thi[s:e], False)[0]
            else:
                Ln[c] = wavefront_sweep(LU[s:e], LV[s:e], eps, Lc[s:e], Llo[s:e], Lhi[s:e], False)[0]


@kernel
def _connect_batch(batch, rank, nptr, nidx, parent, method, eps2, r_out2, block,
                   P, cs, lo, hi,
                   q_order, q_w, q_lo, q_hi, q_s, q_e, q_nw, q_child, q_nchild, roots, max_nodes,
                   dup, TU, TV, Tc, Tlo, Thi, Tn, LU, LV, Lc, Llo, Lhi, Ln,
                   queries, dists, visits, pair_hits):
    for bi in prange(batch.shape[0]):
        g = batch[bi]
        stack = np.empty(max_nodes + 1, dtype=np.int64)
        st = np.zeros(2, dtype=np.int64)
        nq = 0
        dc = 0
        for t in range(nptr[g], nptr[g + 1]):
            h = nidx[t]
            if rank[h] < 0 or rank[h] >= rank[g]:
                continue
            if uf_find(parent, g) == uf_find(parent, h):
                continue
            nq += 1
            pair_hits[t] += 1
            ok = False
            if method == 2:
                r = _usec_pair(g, h, cs, lo, hi, dup, TU, TV, Tc, Tlo, Thi, Tn,
                               LU, LV, Lc, Llo, Lhi, Ln, eps2)
                if r >= 0:
                    ok = r == 1
                else:
                    ok, k = _bcp(P, cs[g], cs[g + 1], cs[h], cs[h + 1], lo, hi, g, h, eps2, block)
                    dc += k
            elif method == 0:
                ok, k = _bcp(P, cs[g], cs[g + 1], cs[h], cs[h + 1], lo, hi, g, h, eps2, block)
                dc += k
            else:
                for i in range(cs[g], cs[g + 1]):
                    if qt_count(P, q_order, q_w, q_lo, q_hi, q_s, q_e, q_nw, q_child, q_nchild,
                                roots[h], P[i], eps2, r_out2, 1, stack, st) > 0:
                        ok = True
                        break
            if ok:
                uf_link(parent, g, h)
        queries[g] += nq
        dists[g] += dc + st[1]
        visits[g] += st[0]


@kernel
def _border(cp, starts, nptr, nidx, core, P, cs, core_label, min_pts, eps2,
            cnt, off, perm, labels, dists, fill):
    m = starts.shape[0] - 1
    for c in prange(m):
        s = starts[c]
        e = starts[c + 1]
        if e - s >= min_pts:
            continue
        found = np.empty(nptr[c + 1] - nptr[c] + 1, dtype=np.int64)
        dc = 0
        for i in range(s, e):
            if core[i]:
                continue
            nf = 0
            for t in range(nptr[c] - 1, nptr[c + 1]):
                h = np.int64(c) if t < nptr[c] else np.int64(nidx[t])
                for j in range(cs[h], cs[h + 1]):
                    dc += 1
                    if _dist2(cp, i, P, j) <= eps2:
                        lab = core_label[j]
                        new = True
                        for q in range(nf):
                            if found[q] == lab:
                                new = False
                                break
                        if new:
                            found[nf] = lab
                            nf += 1
                        break
            if fill:
                w = off[perm[i]]
                for q in range(nf):
                    labels[w + q] = found[q]
            else:
                cnt[i] = nf
        if not fill:
            dists[c] = dc


# ---------------------------------------------------------------- pipeline


class _Run:
    """State shared by the phases of one clustering run."""

    def __init__(self, ds, params: Params, cfg: MethodConfig, grid: Grid | None = None,
                 stats: RunStats | None = None):
        self.ds = as_dataset(ds)
        self.params = params
        self.cfg = cfg
        self.threads = cfg.effective_threads
        self.stats = stats if stats is not None else RunStats()
        self.stats.threads = self.threads
        self.eps2 = params.eps * params.eps
        self.grid = grid

    def cells(self):
        if self.grid is None:
            if self.cfg.cell_method == "box2d":
                self.grid = build_boxes_2d(self.ds, self.params.eps)
            else:
                self.grid = build_grid(self.ds, self.params.eps)
        elif self.grid.eps != self.params.eps:
            raise UsageError("grid was built with a different eps")
        g = self.grid
        self.perm = g.perm
        self.starts = g.starts
        self.m = g.num_cells
        self.cp = np.ascontiguousarray(self.ds.points[g.perm])
        self.nptr, self.nidx = g.neighbor_table(self.threads, self.cfg.leaf_cap)
        self.stats.num_cells = self.m
        self.stats.nbr_ptr, self.stats.nbr_idx = self.nptr, self.nidx

    def mark_core(self):
        n = self.ds.n
        core = np.zeros(n, np.uint8)
        dists = np.zeros(self.m, np.int64)
        mp = self.params.min_pts
        if self.cfg.mark_core == "scan":
            _mark_core_scan(self.threads, self.cp, self.starts, self.nptr, self.nidx, mp, self.eps2,
                            core, dists)
        else:
            counts = np.diff(self.starts)
            small = np.flatnonzero(counts < mp)
            needed = np.zeros(self.m, bool)
            if len(small):
                spans = np.concatenate([self.nidx[self.nptr[c]:self.nptr[c + 1]] for c in small])
                needed[spans] = True
            span_s = self.starts[:-1]
            span_e = np.where(needed, self.starts[1:], self.starts[:-1])
            forest = QuadForest(self.cp, np.arange(n), span_s, span_e, leaf_cap=self.cfg.leaf_cap,
                                threads=self.threads)
            visits = np.zeros(self.m, np.int64)
            _mark_core_qt(self.threads, self.cp, self.starts, self.nptr, self.nidx, mp, self.eps2,
                          core, dists, visits, *forest.arrays(), forest.roots, forest.max_nodes)
            self.stats.quadtree_visits += int(visits.sum())
        self.stats.distance_computations += int(dists.sum())
        self.core = core

    def set_core(self, core_flags):
        core_flags = np.asarray(core_flags, dtype=bool)
        if core_flags.shape != (self.ds.n,):
            raise UsageError("core flags must have one entry per point")
        self.core = core_flags[self.perm].astype(np.uint8)

    def _compact_core(self):
        corepos = np.flatnonzero(self.core)
        self.corepos = corepos
        cell_of_pos = np.repeat(np.arange(self.m), np.diff(self.starts))
        self.ncore = np.bincount(cell_of_pos[corepos], minlength=self.m).astype(np.int64)
        self.cs = np.zeros(self.m + 1, np.int64)
        np.cumsum(self.ncore, out=self.cs[1:])
        self.P = np.ascontiguousarray(self.cp[corepos])
        d = self.ds.d
        self.clo = np.zeros((self.m, d))
        self.chi = np.zeros((self.m, d))
        has = np.flatnonzero(self.ncore)
        if len(has):
            self.clo[has] = np.minimum.reduceat(self.P, self.cs[has], axis=0)
            self.chi[has] = np.maximum.reduceat(self.P, self.cs[has], axis=0)

    def cluster_core(self):
        self._compact_core()
        m, cfg = self.m, self.cfg
        core_cells = np.flatnonzero(self.ncore)
        order = core_cells[np.lexsort((core_cells, -self.ncore[core_cells]))]
        rank = np.full(m, -1, np.int64)
        rank[order] = np.arange(len(order))
        batches = process_buckets(order, cfg.effective_batch_size) if cfg.bucketing else [order]

        method = CONNECTIVITY.index(cfg.connectivity)
        eps = self.params.eps
        r_out2 = self.eps2
        d = self.ds.d
        z1i, z1f, z2f, z1u = (np.zeros(1, np.int64), np.zeros(1), np.zeros((1, d)), np.zeros(1, np.uint8))
        qt_args = (z1i, z1u, z2f, z2f, z1i, z1i, z1i, z1i, z1i, z1i, 0)
        usec_args = (np.zeros(m, np.uint8),) + (z1f, z1f, z1i, z1f, z1f, z1i) * 2
        if cfg.connectivity in ("bcp-quadtree", "approx-quadtree"):
            rho = self.params.rho if cfg.approximate else None
            if rho is not None:
                r_out2 = (eps * (1.0 + rho)) ** 2
            forest = QuadForest(self.P, np.arange(len(self.P)), self.cs[:-1], self.cs[1:],
                                leaf_cap=cfg.leaf_cap, rho=rho, threads=self.threads)
            qt_args = forest.arrays()[1:] + (forest.roots, forest.max_nodes)
        elif cfg.connectivity == "usec2d":
            nc = len(self.P)
            dup = np.zeros(m, np.uint8)
            frames = []
            for _ in range(2):
                frames += [np.empty(nc), np.empty(nc), np.empty(nc, np.int64), np.empty(nc),
                           np.empty(nc), np.zeros(m, np.int64)]
            _usec_prepare(self.threads, self.P, self.cs, eps, *frames, dup)
            usec_args = (dup, *frames)

        parent = np.arange(m, dtype=np.int64)
        queries = np.zeros(m, np.int64)
        dists = np.zeros(m, np.int64)
        visits = np.zeros(m, np.int64)
        pair_hits = np.zeros(len(self.nidx), np.int32)
        for batch in batches:
            _connect_batch(self.threads, batch, rank, self.nptr, self.nidx, parent, method, self.eps2,
                           r_out2, cfg.block_size, self.P, self.cs, self.clo, self.chi,
                           *qt_args, *usec_args, queries, dists, visits, pair_hits)
        st = self.stats
        st.connectivity_queries += int(queries.sum())
        st.distance_computations += int(dists.sum())
        st.quadtree_visits += int(visits.sum())
        st.pair_queries = pair_hits

        roots = np.array([uf_find(parent, c) for c in range(m)], dtype=np.int64) if m else parent
        core_cell = np.repeat(np.arange(m), self.ncore)
        core_orig = self.perm[self.corepos]
        canon = np.full(m, np.iinfo(np.int64).max, np.int64)
        np.minimum.at(canon, roots[core_cell], core_orig)
        self.core_label = canon[roots[core_cell]]

    def cluster_border(self) -> Clustering:
        n = self.ds.n
        cnt = np.zeros(n, np.int64)
        dists = np.zeros(self.m, np.int64)
        args = (self.cp, self.starts, self.nptr, self.nidx, self.core, self.P, self.cs,
                self.core_label, self.params.min_pts, self.eps2)
        _border(self.threads, *args, cnt, np.zeros(1, np.int64), self.perm, np.zeros(1, np.int64),
                dists, False)
        self.stats.distance_computations += int(dists.sum())
        core_orig = self.perm[self.corepos]
        sizes = np.zeros(n, np.int64)
        sizes[self.perm] = cnt
        sizes[core_orig] = 1
        offsets = np.zeros(n + 1, np.int64)
        np.cumsum(sizes, out=offsets[1:])
        labels = np.empty(offsets[-1], np.int64)
        labels[offsets[core_orig]] = self.core_label
        _border(self.threads, *args, cnt, offsets, self.perm, labels, dists, True)
        core = np.zeros(n, bool)
        core[core_orig] = True
        return normalize_labels(Clustering(core, offsets, labels))


def process_buckets(cells_sorted, batch_size: int) -> list[np.ndarray]:
    """Split cells (already in priority order) into consecutive batches."""
    if batch_size < 1:
        raise UsageError("batch_size must be positive")
    cells_sorted = np.asarray(cells_sorted, dtype=np.int64)
    return [cells_sorted[i:i + batch_size] for i in range(0, len(cells_sorted), batch_size)]


def _prepare(ds, params, cfg):
    ds = as_dataset(ds)
    cfg = cfg or MethodConfig()
    if cfg.approximate and params.rho is None:
        params = replace(params, rho=DEFAULT_RHO) if cfg.name else params
    cfg.validate(ds.d, params)
    return ds, params, cfg


def run_dbscan(ds, params: Params, cfg: MethodConfig | None = None,
               stats: RunStats | None = None) -> Clustering:
    """Cluster *ds*; returns labels normalised to the smallest core index per cluster."""
    ds, params, cfg = _prepare(ds, params, cfg)
    stats = stats if stats is not None else RunStats()
    run = _Run(ds, params, cfg, stats=stats)
    t0 = time.perf_counter()
    if ds.n == 0:
        stats.timings.update(cells=0.0, mark_core=0.0, cluster_core=0.0, cluster_border=0.0, total=0.0)
        return Clustering.empty(0)
    phases = [("cells", run.cells), ("mark_core", run.mark_core),
              ("cluster_core", run.cluster_core), ("cluster_border", run.cluster_border)]
    out = None
    for name, fn in phases:
        t = time.perf_counter()
        out = fn()
        stats.timings[name] = time.perf_counter() - t
    stats.timings["total"] = time.perf_counter() - t0
    return out


def mark_core(ds, g: Grid, params: Params, cfg: MethodConfig | None = None,
              stats: RunStats | None = None) -> np.ndarray:
    """Core flag per point (in input order)."""
    ds, params, cfg = _prepare(ds, params, cfg)
    run = _Run(ds, params, cfg, grid=g, stats=stats)
    run.cells()
    run.mark_core()
    out = np.zeros(ds.n, bool)
    out[run.perm] = run.core.astype(bool)
    return out


def cluster_core(ds, g: Grid, core_flags, params: Params, cfg: MethodConfig | None = None,
                 stats: RunStats | None = None) -> np.ndarray:
    """Cluster label per point: smallest core index of its cluster for core points, -1 otherwise."""
    ds, params, cfg = _prepare(ds, params, cfg)
    run = _Run(ds, params, cfg, grid=g, stats=stats)
    run.cells()
    run.set_core(core_flags)
    run.cluster_core()
    out = np.full(ds.n, -1, np.int64)
    out[run.perm[run.corepos]] = run.core_label
    return out


def cluster_border(ds, g: Grid, core_flags, labels, params: Params,
                   cfg: MethodConfig | None = None) -> Clustering:
    """Attach every non-core point to the clusters of the core points within eps."""
    ds, params, cfg = _prepare(ds, params, cfg)
    labels = np.asarray(labels, dtype=np.int64)
    run = _Run(ds, params, cfg, grid=g)
    run.cells()
    run.set_core(core_flags)
    run._compact_core()
    orig = run.perm[run.corepos]
    if np.any(labels[orig] < 0):
        raise UsageError("every core point needs a label")
    run.core_label = labels[orig]
    return run.cluster_border()


def bcp_connected(a, b, eps: float, block_size: int = 32, stats: RunStats | None = None) -> bool:
    """Whether some pair across point sets *a* and *b* is within eps."""
    a = as_points(a)
    b = as_points(b)
    if len(a) == 0 or len(b) == 0:
        raise UsageError("bcp_connected needs two non-empty point sets")
    if a.shape[1] != b.shape[1]:
        raise UsageError("dimension mismatch")
    if block_size < 1:
        raise UsageError("block_size must be positive")
    P = np.concatenate([a, b])
    lo = np.stack([a.min(0), b.min(0)])
    hi = np.stack([a.max(0), b.max(0)])
    hit, k = _bcp(P, 0, len(a), len(a), len(P), lo, hi, 0, 1, eps * eps, int(block_size))
    if stats is not None:
        stats.distance_computations += int(k)
    return bool(hit)
