"""Unit-spherical emptiness checking with line separation (2-D only).

A wavefront is the upper envelope of equal-radius circles whose centres
all lie on one side of an axis-aligned line.  Coordinates are mapped to a
frame ``(u, v)`` where ``u`` runs along the line and ``v`` grows away from
the centres:

* ``top``:  ``(u, v) = (x, y)``, line ``y = max y`` of the centres
* ``left``: ``(u, v) = (y, -x)``, line ``x = min x`` of the centres

Both maps are isometries, so squared distances are unchanged bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import UsageError, as_points

SIDES = ("top", "left")


@njit(cache=True, inline="always")
def _height(u, v, c, x, eps2):
    t = x - u[c]
    r = eps2 - t * t
    return v[c] + np.sqrt(r) if r > 0.0 else v[c]


@njit(cache=True)
def _crossing(u, v, b, c, eps):
    """Abscissa where the upper semicircles of b and c (u[b] < u[c]) meet."""
    du = u[c] - u[b]
    dv = v[c] - v[b]
    l2 = du * du + dv * dv
    h2 = eps * eps - 0.25 * l2
    h = np.sqrt(h2) if h2 > 0.0 else 0.0
    return 0.5 * (u[b] + u[c]) - h * dv / np.sqrt(l2)


@njit(cache=True)
def wavefront_sweep(u, v, eps, arc_c, arc_lo, arc_hi, check):
    """Envelope of circles centred at ``(u[i], v[i])``, given in (u, v) order.

    Fills ``arc_*`` and returns ``(arcs, violations)``.  With ``check`` set,
    every insertion verifies the new circle stays at or below each retained
    arc left of its single crossing; ``violations`` counts breaches.
    """
    n = u.shape[0]
    eps2 = eps * eps
    tol = 1e-9 * eps
    top = -1
    violations = 0
    for i in range(n):
        left_end = u[i] - eps
        right_end = u[i] + eps
        start = left_end
        while top >= 0:
            b = arc_c[top]
            lo = arc_lo[top]
            hi = arc_hi[top]
            if hi < left_end:
                break
            if _height(u, v, i, hi, eps2) < _height(u, v, b, hi, eps2):
                # the new circle stays below b on their whole overlap
                start = hi
                break
            x0 = lo if lo > left_end else left_end
            if _height(u, v, i, x0, eps2) >= _height(u, v, b, x0, eps2):
                if lo >= left_end:
                    top -= 1
                    start = lo
                    continue
                arc_hi[top] = left_end
                start = left_end
                break
            x = _crossing(u, v, b, i, eps)
            if x < x0:
                x = x0
            elif x > hi:
                x = hi
            arc_hi[top] = x
            start = x
            break
        if top < 0 and start > left_end:
            start = left_end
        if check:
            for a in range(top + 1):
                b = arc_c[a]
                xr = arc_hi[a] if arc_hi[a] < start else start
                if xr <= left_end or xr < arc_lo[a]:
                    continue
                if _height(u, v, i, xr, eps2) > _height(u, v, b, xr, eps2) + tol:
                    violations += 1
        if start < right_end:
            top += 1
            arc_c[top] = i
            arc_lo[top] = start
            arc_hi[top] = right_end
    return top + 1, violations


@njit(cache=True)
def wavefront_query(u, v, arc_c, arc_lo, arc_hi, narcs, qu, qv, eps2):
    """True iff some query point (sorted by ``qu``) lies within eps of a centre.

    The arc cursor only moves forward.  Membership is decided by the exact
    squared distance to the envelope's circle at ``qu`` and its two
    neighbouring arcs, so boundary ties match a brute-force check.
    """
    j = 0
    for i in range(qu.shape[0]):
        while j < narcs and arc_hi[j] < qu[i]:
            j += 1
        if j == narcs:
            return False
        for t in range(j - 1, j + 2):
            if 0 <= t < narcs:
                c = arc_c[t]
                du = qu[i] - u[c]
                dv = qv[i] - v[c]
                if du * du + dv * dv <= eps2:
                    return True
    return False


def to_frame(points: np.ndarray, side: str) -> tuple[np.ndarray, np.ndarray]:
    if side == "top":
        return points[:, 0].copy(), points[:, 1].copy()
    if side == "left":
        return points[:, 1].copy(), -points[:, 0]
    raise UsageError(f"side must be one of {SIDES}")


@dataclass(frozen=True)
class Wavefront:
    side: str
    line: float           # in the (u, v) frame: v-coordinate of the separating line
    u: np.ndarray         # circle centres, sorted by (u, v)
    v: np.ndarray
    eps: float
    arc_circle: np.ndarray
    arc_lo: np.ndarray
    arc_hi: np.ndarray
    violations: int = 0

    def __len__(self) -> int:
        return len(self.arc_circle)

    def height(self, x: float) -> float:
        """Envelope height at abscissa *x* (``-inf`` where no circle reaches)."""
        best = -np.inf
        eps2 = self.eps * self.eps
        j = np.searchsorted(self.arc_hi, x)
        for t in (j - 1, j, j + 1):
            if 0 <= t < len(self) and self.arc_lo[t] <= x <= self.arc_hi[t]:
                c = self.arc_circle[t]
                r = eps2 - (x - self.u[c]) ** 2
                if r >= 0:
                    best = max(best, self.v[c] + np.sqrt(r))
        return best


def build_wavefront(points, eps: float, side: str = "top", check: bool = False) -> Wavefront:
    """Envelope of eps-circles around *points*, beyond their top or left boundary."""
    pts = as_points(points)
    if pts.shape[1] != 2:
        raise UsageError("wavefronts are 2-D only")
    if len(pts) == 0:
        raise UsageError("a wavefront needs at least one point")
    u, v = to_frame(pts, side)
    order = np.lexsort((v, u))
    u, v = u[order], v[order]
    if np.any((u[1:] == u[:-1]) & (v[1:] == v[:-1])):
        raise UsageError("duplicate points cannot generate a wavefront")
    n = len(u)
    arc_c = np.empty(n, np.int64)
    arc_lo = np.empty(n)
    arc_hi = np.empty(n)
    k, bad = wavefront_sweep(u, v, float(eps), arc_c, arc_lo, arc_hi, check)
    return Wavefront(side, float(v.max()), u, v, float(eps), arc_c[:k].copy(), arc_lo[:k].copy(),
                     arc_hi[:k].copy(), int(bad))


def usec_query(w: Wavefront, points, eps: float) -> bool:
    """Whether any of *points* (on the far side of the line) is within eps of a centre."""
    pts = as_points(points)
    if len(pts) == 0:
        return False
    qu, qv = to_frame(pts, w.side)
    if np.any(qv < w.line):
        raise UsageError("query points must lie beyond the wavefront's line")
    order = np.argsort(qu, kind="stable")
    return bool(wavefront_query(w.u, w.v, w.arc_circle, w.arc_lo, w.arc_hi, len(w),
                                qu[order], qv[order], eps * eps))


def separating_side(a_lo, a_hi, b_lo, b_hi):
    """Which precomputed wavefront separates two point sets, from their boxes.

    Returns ``(side, owner)`` with owner 0 for *a*'s wavefront and 1 for *b*'s,
    or ``None`` when no top/left boundary separates them.
    """
    if b_lo[1] >= a_hi[1]:
        return "top", 0
    if a_lo[1] >= b_hi[1]:
        return "top", 1
    if b_hi[0] <= a_lo[0]:
        return "left", 0
    if a_hi[0] <= b_lo[0]:
        return "left", 1
    return None


def connect_cells_usec(a_points, b_points, eps: float, block_size: int = 32) -> bool:
    """Whether two point sets have a pair within eps, answered by a wavefront query.

    Falls back to :func:`griddbscan.engine.bcp_connected` when no top/left
    boundary separates the sets or a generating set holds duplicate points.
    """
    from .engine import bcp_connected

    a = as_points(a_points)
    b = as_points(b_points)
    if a.shape[1] != 2 or b.shape[1] != 2:
        raise UsageError("connect_cells_usec is 2-D only")
    sep = separating_side(a.min(0), a.max(0), b.min(0), b.max(0))
    if sep is None:
        return bcp_connected(a, b, eps, block_size)
    side, owner = sep
    gen, qry = (a, b) if owner == 0 else (b, a)
    try:
        w = build_wavefront(gen, eps, side)
    except UsageError:
        return bcp_connected(a, b, eps, block_size)
    return usec_query(w, qry, eps)
