"""Brute-force reference DBSCAN and clustering validators.

Deliberately shares no code with the grid pipeline beyond the data types,
so a bug there cannot hide itself here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import Clustering, Params, UsageError, as_dataset, normalize_labels

ORACLE_CAP = 5000


def _within(points: np.ndarray, r2: float, block: int = 512) -> csr_matrix:
    """Boolean adjacency (self included) of pairs at squared distance <= r2."""
    n, d = points.shape
    rows, cols = [], []
    for s in range(0, n, block):
        e = min(s + block, n)
        acc = np.zeros((e - s, n))
        for k in range(d):  # axis order matches the engine's accumulation
            acc += (points[s:e, k, None] - points[None, :, k]) ** 2
        i, j = np.nonzero(acc <= r2)
        rows.append(i + s)
        cols.append(j)
    rows = np.concatenate(rows) if rows else np.zeros(0, np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, np.int64)
    return csr_matrix((np.ones(len(rows), bool), (rows, cols)), shape=(n, n))


def _check_cap(n: int, cap: int) -> None:
    if n > cap:
        raise UsageError(f"oracle refuses n={n} (cap {cap})")


def dbscan_bruteforce(ds, params: Params, cap: int = ORACLE_CAP) -> Clustering:
    """Exact DBSCAN by quadratic neighbourhood enumeration."""
    ds = as_dataset(ds)
    _check_cap(ds.n, cap)
    n = ds.n
    if n == 0:
        return Clustering.empty(0)
    adj = _within(ds.points, params.eps * params.eps)
    core = np.diff(adj.indptr) >= params.min_pts
    core_idx = np.flatnonzero(core)
    _, comp = connected_components(adj[core_idx][:, core_idx], directed=False)
    label_of = np.full(n, -1, np.int64)
    label_of[core_idx] = core_idx[np.unique(comp, return_index=True)[1]][comp]

    lists: list[list[int]] = []
    for i in range(n):
        if core[i]:
            lists.append([int(label_of[i])])
        else:
            nb = adj.indices[adj.indptr[i]:adj.indptr[i + 1]]
            lists.append(sorted({int(x) for x in label_of[nb[core[nb]]]}))
    return normalize_labels(Clustering.from_lists(core, lists))


@dataclass(frozen=True)
class PartitionSignature:
    """Label-free canonical form: core flags, core groups, border label sets."""

    core: tuple[bool, ...]
    clusters: tuple[tuple[int, ...], ...]
    memberships: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, c: Clustering) -> "PartitionSignature":
        c = normalize_labels(c)
        core = tuple(bool(x) for x in c.core)
        groups: dict[int, list[int]] = {}
        for i in np.flatnonzero(c.core):
            groups.setdefault(int(c.labels[c.offsets[i]]), []).append(int(i))
        # normalised labels are the smallest core index, so they name groups canonically
        return cls(core, tuple(tuple(g) for _, g in sorted(groups.items())),
                   tuple(tuple(int(x) for x in c.labels_of(i)) for i in range(c.n)))


def clustering_equal(a: Clustering, b: Clustering) -> bool:
    """Equality up to renaming of clusters."""
    if a.n != b.n:
        raise UsageError(f"clusterings cover different sizes ({a.n} vs {b.n})")
    return PartitionSignature.of(a) == PartitionSignature.of(b)


@dataclass(frozen=True)
class ApproxReport:
    valid: bool
    check: str | None = None
    message: str = ""
    witness: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


def check_approx_valid(ds, params: Params, c: Clustering, cap: int = ORACLE_CAP) -> ApproxReport:
    """Validate *c* against the rho-approximate DBSCAN definition; report the first violation."""
    ds = as_dataset(ds)
    _check_cap(ds.n, cap)
    if params.rho is None:
        raise UsageError("check_approx_valid needs params.rho")
    if c.n != ds.n:
        raise UsageError("clustering and dataset sizes differ")
    n = ds.n
    if n == 0:
        return ApproxReport(True)
    eps = params.eps
    adj = _within(ds.points, eps * eps)
    core = np.diff(adj.indptr) >= params.min_pts
    bad = np.flatnonzero(core != c.core)
    if len(bad):
        i = int(bad[0])
        return ApproxReport(False, "i", f"point {i} core flag is {bool(c.core[i])}, expected {bool(core[i])}", (i,))

    sizes = np.diff(c.offsets)
    core_idx = np.flatnonzero(core)
    if np.any(sizes[core_idx] != 1):
        i = int(core_idx[sizes[core_idx] != 1][0])
        return ApproxReport(False, "i", f"core point {i} carries {int(sizes[i])} labels", (i,))
    label = np.full(n, -1, np.int64)
    label[core_idx] = c.labels[c.offsets[core_idx]]

    coo = adj.tocoo()
    both = core[coo.row] & core[coo.col]
    r, s = coo.row[both], coo.col[both]
    split = np.flatnonzero(label[r] != label[s])
    if len(split):
        i, j = int(r[split[0]]), int(s[split[0]])
        return ApproxReport(False, "ii", f"core points {i} and {j} are within eps but labelled apart", (i, j))

    # (iii): edges of length <= eps(1+rho) inside one cluster must connect it
    far = _within(ds.points, (eps * (1.0 + params.rho)) ** 2).tocoo()
    keep = core[far.row] & core[far.col] & (label[far.row] == label[far.col])
    g = csr_matrix((np.ones(int(keep.sum()), bool), (far.row[keep], far.col[keep])), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    first: dict[int, int] = {}
    for i in core_idx:
        lab = int(label[i])
        j = first.setdefault(lab, int(i))
        if comp[j] != comp[i]:
            return ApproxReport(False, "iii", f"cluster {lab} is not connected within eps(1+rho): "
                                f"{j} and {int(i)} are in different pieces", (j, int(i)))

    for i in np.flatnonzero(~core):
        nb = adj.indices[adj.indptr[i]:adj.indptr[i + 1]]
        want = sorted({int(x) for x in label[nb[core[nb]]]})
        got = [int(x) for x in c.labels_of(int(i))]
        if sorted(set(got)) != want:
            return ApproxReport(False, "iv", f"point {int(i)} has labels {got}, expected {want}", (int(i),))
    return ApproxReport(True)
