"""Seeded synthetic point sets: uniform fill and seed-spreader random walks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, UsageError

FAMILIES = ("uniform", "ss-simden", "ss-varden")
SS_SIDE = 1e5
VARDEN_FACTORS = (1.0, 3.0, 10.0)


@dataclass(frozen=True)
class GenSpec:
    """Generator parameters; ``None`` fields take family defaults (see :meth:`resolved`)."""

    family: str
    n: int
    d: int
    seed: int = 0
    restart_prob: float | None = None
    step_scale: float | None = None
    spread_factors: tuple[float, ...] = VARDEN_FACTORS
    side: float = SS_SIDE

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.n < 1 or self.d < 1:
            raise UsageError("n and d must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must fit in 64 unsigned bits")
        if self.restart_prob is not None and not 0 < self.restart_prob < 1:
            raise UsageError("restart_prob must lie in (0, 1)")
        if self.step_scale is not None and self.step_scale < 0:
            raise UsageError("step_scale must be non-negative")
        if not self.spread_factors or min(self.spread_factors) < 0:
            raise UsageError("spread_factors must be a non-empty list of non-negative reals")
        if not self.side > 0:
            raise UsageError("side must be positive")

    def resolved(self) -> "GenSpec":
        p = self.restart_prob if self.restart_prob is not None else min(10.0 / self.n, 0.5)
        s = self.step_scale if self.step_scale is not None else self.side / 1000.0
        return GenSpec(self.family, self.n, self.d, self.seed, p, s, tuple(self.spread_factors), self.side)


def parse_gen(text: str) -> GenSpec:
    """Parse ``FAMILY:N:D:SEED``."""
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--gen expects FAMILY:N:D:SEED, got {text!r}")
    try:
        n, d, seed = (int(x) for x in parts[1:])
    except ValueError:
        raise UsageError(f"--gen expects integers for N, D and SEED, got {text!r}") from None
    return GenSpec(parts[0], n, d, seed)


def gen_uniform(spec: GenSpec) -> Dataset:
    """``n`` points uniform in ``[0, sqrt(n)]^d``."""
    if spec.family != "uniform":
        raise UsageError("gen_uniform needs family 'uniform'")
    rng = np.random.default_rng(spec.seed)
    return Dataset(rng.random((spec.n, spec.d)) * np.sqrt(spec.n))


def _fold(x: np.ndarray, side: float) -> np.ndarray:
    """Reflect coordinates back into ``[0, side]``."""
    x = np.mod(x, 2 * side)
    return np.where(x > side, 2 * side - x, x)


def gen_seed_spreader(spec: GenSpec, return_segments: bool = False):
    """Random walk with restarts inside ``[0, side]^d``.

    Each step either jumps to a uniform location (opening a new segment) or
    moves by a Gaussian step of ``step_scale`` per axis.  For ``ss-varden``
    the step scale of segment ``k`` is multiplied by
    ``spread_factors[k % len(spread_factors)]``.  With ``return_segments``
    the segment id of every point is returned too.
    """
    if spec.family not in ("ss-simden", "ss-varden"):
        raise UsageError("gen_seed_spreader needs family 'ss-simden' or 'ss-varden'")
    spec = spec.resolved()
    n, d = spec.n, spec.d
    rng = np.random.default_rng(spec.seed)
    restart = rng.random(n) < spec.restart_prob
    restart[0] = True
    seg = np.cumsum(restart) - 1
    nseg = int(seg[-1]) + 1
    starts = rng.random((nseg, d)) * spec.side
    steps = rng.standard_normal((n, d)) * spec.step_scale
    if spec.family == "ss-varden":
        f = np.asarray(spec.spread_factors, dtype=np.float64)
        steps *= f[np.arange(nseg) % len(f)][seg, None]
    steps[restart] = 0.0
    walk = np.cumsum(steps, axis=0)
    first = np.flatnonzero(restart)
    walk -= walk[first][seg]
    pts = _fold(starts[seg] + walk, spec.side)
    ds = Dataset(pts)
    return (ds, seg) if return_segments else ds


def generate(spec: GenSpec) -> Dataset:
    if spec.family == "uniform":
        return gen_uniform(spec)
    return gen_seed_spreader(spec)
