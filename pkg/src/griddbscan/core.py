"""Value types shared by every stage: datasets, parameters, cell keys, clusterings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class UsageError(ValueError):
    """Invalid arguments or an unsupported parameter/method combination."""


def as_points(points) -> np.ndarray:
    """Return a read-only C-contiguous float64 ``(n, d)`` view of *points*."""
    if isinstance(points, Dataset):
        return points.points
    arr = np.array(points, dtype=np.float64, copy=True)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 1)
    if arr.ndim != 2:
        raise UsageError(f"points must be a 2-D array, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise UsageError("dimension must be at least 1")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise UsageError(f"non-finite coordinate at row {bad[0]}, column {bad[1]}")
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


class Dataset:
    """Immutable ``n x d`` point set together with its bounding box."""

    __slots__ = ("points", "lo", "hi")

    def __init__(self, points):
        self.points = as_points(points)
        if len(self.points):
            self.lo = self.points.min(axis=0)
            self.hi = self.points.max(axis=0)
        else:
            self.lo = np.zeros(self.d)
            self.hi = np.zeros(self.d)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, d={self.d})"


def as_dataset(ds) -> Dataset:
    return ds if isinstance(ds, Dataset) else Dataset(ds)


@dataclass(frozen=True)
class Params:
    eps: float
    min_pts: int
    rho: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise UsageError(f"eps must be positive and finite, got {self.eps}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise UsageError(f"minPts must be a positive integer, got {self.min_pts}")
        if self.rho is not None and not (math.isfinite(self.rho) and self.rho > 0):
            raise UsageError(f"rho must be positive, got {self.rho}")


def squared_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """Sum of squared coordinate differences, accumulated from axis 0 upward.

    Every kernel in the package uses this exact accumulation order, so
    ``squared_distance(a, b) <= eps**2`` is the one distance predicate.
    """
    if len(a) != len(b):
        raise UsageError(f"dimension mismatch: {len(a)} vs {len(b)}")
    acc = 0.0
    for x, y in zip(a, b):
        t = float(x) - float(y)
        acc += t * t
    return acc


def cell_side(eps: float, d: int) -> float:
    return eps / math.sqrt(d)


def compute_cell_key(p: Sequence[float], eps: float, origin: Sequence[float], d: int) -> tuple[int, ...]:
    """Lattice coordinates of the half-open cell of side ``eps/sqrt(d)`` holding *p*."""
    side = cell_side(eps, d)
    return tuple(int(math.floor((float(p[k]) - float(origin[k])) / side)) for k in range(d))


def cell_keys(points: np.ndarray, eps: float, origin: np.ndarray) -> np.ndarray:
    """Vectorised :func:`compute_cell_key` over the rows of *points*."""
    side = cell_side(eps, points.shape[1])
    return np.floor((points - origin) / side).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Clustering:
    """Per-point cluster label sets stored in CSR form.

    ``labels[offsets[i]:offsets[i+1]]`` are the clusters of point ``i``;
    an empty range marks noise.  Core points carry exactly one label.
    """

    core: np.ndarray
    offsets: np.ndarray
    labels: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.core)

    def labels_of(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.labels[self.offsets[i]:self.offsets[i + 1]])

    def to_lists(self) -> list[list[int]]:
        return [list(self.labels_of(i)) for i in range(self.n)]

    def kinds(self) -> np.ndarray:
        """Array of ``"core"``, ``"border"`` or ``"noise"`` per point."""
        out = np.full(self.n, "noise", dtype=object)
        out[np.diff(self.offsets) > 0] = "border"
        out[self.core] = "core"
        return out

    @property
    def num_clusters(self) -> int:
        if not self.core.any():
            return 0
        return len(np.unique(self.labels[self.offsets[:-1][self.core]]))

    def counts(self) -> dict[str, int]:
        sizes = np.diff(self.offsets)
        core = int(self.core.sum())
        border = int(((sizes > 0) & ~self.core).sum())
        return {"core": core, "border": border, "noise": self.n - core - border}

    @classmethod
    def from_lists(cls, core: Iterable[bool], labels: Sequence[Iterable[int]]) -> "Clustering":
        core = np.asarray(list(core), dtype=bool)
        sets = [list(x) for x in labels]
        if len(sets) != len(core):
            raise UsageError("core flags and label lists differ in length")
        sizes = np.array([len(s) for s in sets], dtype=np.int64)
        offsets = np.zeros(len(sets) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        flat = np.array([x for s in sets for x in s], dtype=np.int64)
        return cls(core, offsets, flat)

    @classmethod
    def empty(cls, n: int = 0) -> "Clustering":
        return cls(np.zeros(n, dtype=bool), np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))


def normalize_labels(c: Clustering) -> Clustering:
    """Rename every cluster to its smallest core-point index; sort and dedupe label sets."""
    n = c.n
    sizes = np.diff(c.offsets)
    core_idx = np.flatnonzero(c.core)
    if np.any(sizes[core_idx] != 1):
        bad = core_idx[sizes[core_idx] != 1][0]
        raise UsageError(f"core point {bad} must carry exactly one label")
    if len(c.labels) == 0:
        return Clustering(c.core.copy(), c.offsets.copy(), c.labels.copy())

    uniq, inv = np.unique(c.labels, return_inverse=True)
    canon = np.full(len(uniq), np.iinfo(np.int64).max, dtype=np.int64)
    core_label_pos = c.offsets[core_idx]
    np.minimum.at(canon, inv[core_label_pos], core_idx)
    if np.any(canon == np.iinfo(np.int64).max):
        orphan = uniq[canon == np.iinfo(np.int64).max][0]
        raise UsageError(f"label {orphan} has no core point")

    owner = np.repeat(np.arange(n, dtype=np.int64), sizes)
    new = canon[inv]
    order = np.lexsort((new, owner))
    owner, new = owner[order], new[order]
    keep = np.ones(len(new), dtype=bool)
    keep[1:] = (owner[1:] != owner[:-1]) | (new[1:] != new[:-1])
    owner, new = owner[keep], new[keep]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=n), out=offsets[1:])
    return Clustering(c.core.copy(), offsets, new)
