import math

import numpy as np
import pytest

from griddbscan import UsageError
from griddbscan.quadtree import (
    approx_depth_bound,
    build_quadtree,
    qt_range_count_approx,
    qt_range_count_exact,
)

from conftest import pairwise_sq


def random_cell(rng, d, n, eps=1.0, duplicates=False):
    P = rng.uniform(0, eps / math.sqrt(d), (n, d))
    if duplicates:
        P = np.round(P * 4) / 4 * (eps / math.sqrt(d))
    return P


def test_small_cell_is_a_single_leaf(rng):
    q = build_quadtree(random_cell(rng, 3, 10), 1.0, leaf_cap=16)
    assert len(q.nodes()) == 1 and len(q.leaves()) == 1


def test_depth_bound_for_quarter():
    assert approx_depth_bound(0.25) == 3


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_exact_tree_structure(rng, d):
    P = random_cell(rng, d, 400)
    q = build_quadtree(P, 1.0, leaf_cap=4)
    f = q.forest
    leaves = q.leaves()
    assert sum(int(f.nd_e[v] - f.nd_s[v]) for v in leaves) == len(P)
    for v in q.nodes():
        k = f.nd_nchild[v]
        if k:
            kids = range(f.nd_child[v], f.nd_child[v] + k)
            assert k >= 2
            assert sum(int(f.nd_e[c] - f.nd_s[c]) for c in kids) == f.nd_e[v] - f.nd_s[v]
        else:
            pts = P[f.order[f.nd_s[v]:f.nd_e[v]]]
            assert np.all(pts >= f.nd_lo[v]) and np.all(pts <= f.nd_hi[v])


def test_far_query_prunes_at_root(rng):
    q = build_quadtree(random_cell(rng, 2, 200), 1.0, leaf_cap=4)
    stats = {}
    assert qt_range_count_exact(q, [10.0, 10.0], 1.0, stats=stats) == 0
    assert stats["visits"] == 0 and stats["distances"] == 0


def test_whole_box_inside_counts_without_descending(rng):
    P = random_cell(rng, 2, 200)
    q = build_quadtree(P, 1.0, leaf_cap=4)
    stats = {}
    assert qt_range_count_exact(q, P.mean(0), 2.0, stats=stats) == 200
    assert stats["visits"] == 1 and stats["distances"] == 0


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_exact_count_matches_linear_scan(rng, d):
    for trial in range(10):
        P = random_cell(rng, d, int(rng.integers(1, 300)), duplicates=trial % 3 == 0)
        q = build_quadtree(P, 1.0, leaf_cap=int(rng.integers(1, 20)))
        Q = np.concatenate([P, rng.uniform(-1.5, 2.5, (100, d))])
        want = (pairwise_sq(Q, P) <= 1.0).sum(1)
        got = [qt_range_count_exact(q, p, 1.0) for p in Q]
        assert got == want.tolist()
        nonzero = [qt_range_count_exact(q, p, 1.0, mode="nonzero") > 0 for p in Q]
        assert nonzero == (want > 0).tolist()


def test_core_only_counts_flagged_points(rng):
    P = random_cell(rng, 2, 100)
    core = rng.random(100) < 0.5
    q = build_quadtree(P, 1.0, leaf_cap=4, core=core)
    for p in rng.uniform(-1, 2, (50, 2)):
        want = int(((pairwise_sq(p[None], P)[0] <= 1.0) & core).sum())
        assert qt_range_count_exact(q, p, 1.0, core_only=True) == want


@pytest.mark.parametrize("rho", [0.01, 0.1, 0.5])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_approx_count_sandwich(rng, rho, d):
    for _ in range(5):
        P = random_cell(rng, d, int(rng.integers(1, 400)))
        q = build_quadtree(P, 1.0, leaf_cap=4, rho=rho)
        assert q.depth <= approx_depth_bound(rho)
        Q = np.concatenate([P, rng.uniform(-1.5, 2.5, (100, d))])
        D = pairwise_sq(Q, P)
        lo = (D <= 1.0).sum(1)
        hi = (D <= (1 + rho) ** 2).sum(1)
        got = np.array([qt_range_count_approx(q, p, 1.0, rho) for p in Q])
        assert np.all(lo <= got) and np.all(got <= hi)


def test_approx_all_inside_and_all_outside(rng):
    P = random_cell(rng, 2, 100)
    q = build_quadtree(P, 1.0, leaf_cap=4, rho=0.1)
    assert qt_range_count_approx(q, P.mean(0), 1.0, 0.1) == 100
    assert qt_range_count_approx(q, [5.0, 5.0], 1.0, 0.1) == 0


def test_approx_visits_do_not_grow_with_cell_size(rng):
    means = []
    for n in (1000, 4000, 16000):
        P = random_cell(rng, 2, n)
        q = build_quadtree(P, 1.0, leaf_cap=16, rho=0.1)
        stats = {}
        Q = rng.uniform(-0.8, 1.5, (300, 2))
        for p in Q:
            qt_range_count_approx(q, p, 1.0, 0.1, stats=stats)
        means.append(stats["visits"] / len(Q))
    assert means[-1] <= means[0] * 1.5 + 2


def test_mode_mismatch_is_rejected(rng):
    P = random_cell(rng, 2, 10)
    with pytest.raises(UsageError):
        qt_range_count_approx(build_quadtree(P, 1.0), P[0], 1.0, 0.1)
    with pytest.raises(UsageError):
        qt_range_count_approx(build_quadtree(P, 1.0, rho=0.2), P[0], 1.0, 0.1)
    with pytest.raises(UsageError):
        qt_range_count_exact(build_quadtree(P, 1.0, rho=0.2), P[0], 1.0)


def test_points_must_fit_one_cell():
    with pytest.raises(UsageError):
        build_quadtree([[0.0, 0.0], [5.0, 5.0]], 1.0)
