import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from griddbscan import Clustering, Params, UsageError, compute_cell_key, normalize_labels, squared_distance
from griddbscan.core import as_points, cell_keys


def test_squared_distance_examples():
    assert squared_distance((0, 0), (0, 0)) == 0
    assert squared_distance((0, 0), (3, 4)) == 25


def test_squared_distance_matches_naive_accumulation(rng):
    for _ in range(200):
        a, b = rng.normal(size=5) * 1e3, rng.normal(size=5) * 1e3
        acc = 0.0
        for x, y in zip(a.tolist(), b.tolist()):
            acc = acc + (x - y) * (x - y)
        assert squared_distance(a, b) == acc


def test_squared_distance_dimension_mismatch():
    with pytest.raises(UsageError):
        squared_distance((0, 0), (0, 0, 0))


@pytest.mark.parametrize("p, origin, key", [
    ((0.9, 0.9), (0, 0), (0, 0)),
    ((1.0, 0.0), (0, 0), (1, 0)),
    ((-0.1, 2.3), (-1, -1), (0, 3)),
])
def test_cell_key_examples(p, origin, key):
    assert compute_cell_key(p, math.sqrt(2), origin, 2) == key


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 4)),
              elements=st.floats(-50, 50, allow_nan=False)),
       st.floats(0.05, 20))
def test_points_sharing_a_cell_are_strictly_within_eps(P, eps):
    keys = cell_keys(P, eps, P.min(axis=0))
    for i in range(len(P)):
        same = np.all(keys == keys[i], axis=1)
        for j in np.flatnonzero(same):
            assert squared_distance(P[i], P[j]) < eps * eps


def test_params_validation():
    with pytest.raises(UsageError):
        Params(0.0, 3)
    with pytest.raises(UsageError):
        Params(1.0, 0)
    with pytest.raises(UsageError):
        Params(1.0, 2, rho=-0.1)


def test_as_points_rejects_non_finite():
    with pytest.raises(UsageError, match="row 1"):
        as_points([[0.0, 1.0], [np.nan, 2.0]])


def test_normalize_single_cluster_takes_smallest_core():
    core = [i in (2, 5, 9) for i in range(10)]
    labels = [[7] if c else [] for c in core]
    labels[3] = [7]
    out = normalize_labels(Clustering.from_lists(core, labels))
    assert [out.labels_of(i) for i in (2, 3, 5, 9)] == [(2,)] * 4


def test_normalize_all_noise_unchanged():
    c = Clustering.from_lists([False] * 4, [[]] * 4)
    out = normalize_labels(c)
    assert out.to_lists() == [[]] * 4 and not out.core.any()


def test_normalize_rejects_label_without_core():
    with pytest.raises(UsageError):
        normalize_labels(Clustering.from_lists([True, False], [[0], [9]]))


@st.composite
def clusterings(draw):
    n = draw(st.integers(1, 30))
    core = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    core_idx = [i for i in range(n) if core[i]]
    names = draw(st.lists(st.integers(0, 1000), min_size=len(core_idx), max_size=len(core_idx)))
    lab = dict(zip(core_idx, names))
    labels = []
    for i in range(n):
        if core[i]:
            labels.append([lab[i]])
        elif names:
            labels.append(draw(st.lists(st.sampled_from(names), max_size=3)))
        else:
            labels.append([])
    return Clustering.from_lists(core, labels)


@settings(max_examples=100, deadline=None)
@given(clusterings())
def test_normalize_is_idempotent(c):
    once = normalize_labels(c)
    twice = normalize_labels(once)
    assert np.array_equal(once.offsets, twice.offsets)
    assert np.array_equal(once.labels, twice.labels)
    for i in range(c.n):
        labs = once.labels_of(i)
        assert list(labs) == sorted(set(labs))
        assert all(once.core[x] for x in labs)
