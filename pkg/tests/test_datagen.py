import numpy as np
import pytest

from griddbscan import MethodConfig, Params, UsageError, run_dbscan
from griddbscan.datagen import GenSpec, gen_seed_spreader, gen_uniform, generate, parse_gen


def test_single_uniform_point():
    ds = gen_uniform(GenSpec("uniform", 1, 3, 9))
    assert ds.n == 1 and np.all((ds.points >= 0) & (ds.points <= 1))


@pytest.mark.parametrize("family", ["uniform", "ss-simden", "ss-varden"])
def test_same_seed_same_bytes(family):
    a = generate(GenSpec(family, 2000, 3, 42)).points
    b = generate(GenSpec(family, 2000, 3, 42)).points
    c = generate(GenSpec(family, 2000, 3, 43)).points
    assert a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()


def test_uniform_mean():
    ds = gen_uniform(GenSpec("uniform", 10_000, 2, 1))
    assert np.all(np.abs(ds.points.mean(0) - 50.0) <= 0.05 * 50.0)
    assert ds.points.min() >= 0 and ds.points.max() <= 100


def test_restart_count_is_binomial():
    n, p = 100_000, 0.002
    _, seg = gen_seed_spreader(GenSpec("ss-simden", n, 2, 5, restart_prob=p), return_segments=True)
    restarts = int(seg[-1])  # the first point opens a segment without a jump
    sigma = np.sqrt((n - 1) * p * (1 - p))
    assert abs(restarts - (n - 1) * p) <= 3 * sigma


def test_zero_step_collapses_segments():
    ds, seg = gen_seed_spreader(GenSpec("ss-varden", 500, 3, 2, step_scale=0.0), return_segments=True)
    for s in np.unique(seg):
        assert len(np.unique(ds.points[seg == s], axis=0)) == 1


@pytest.mark.parametrize("family", ["ss-simden", "ss-varden"])
def test_coordinates_stay_in_the_domain(family):
    ds = gen_seed_spreader(GenSpec(family, 50_000, 2, 8, step_scale=5000.0))
    assert np.isfinite(ds.points).all()
    assert ds.points.min() >= 0 and ds.points.max() <= 1e5


def test_varden_spreads_vary_by_segment():
    ds, seg = gen_seed_spreader(GenSpec("ss-varden", 30_000, 2, 11, restart_prob=1e-3), return_segments=True)
    steps = np.linalg.norm(np.diff(ds.points, axis=0), axis=1)[seg[1:] == seg[:-1]]
    typical = [np.median(steps[(seg[1:] == s)[seg[1:] == seg[:-1]]]) for s in range(3)]
    assert typical[0] < typical[1] < typical[2]


def test_simden_clusters_recover_segments():
    ds, seg = gen_seed_spreader(GenSpec("ss-simden", 100_000, 3, 7), return_segments=True)
    nseg = int(seg.max()) + 1
    found = [(eps, k) for eps in (300, 600, 1000) for k in (5, 10)
             if run_dbscan(ds, Params(eps, k), MethodConfig(threads=1)).num_clusters == nseg]
    assert found


def test_spec_validation():
    with pytest.raises(UsageError):
        GenSpec("gauss", 10, 2)
    with pytest.raises(UsageError):
        GenSpec("uniform", 0, 2)
    with pytest.raises(UsageError):
        GenSpec("ss-simden", 10, 2, restart_prob=1.0)
    with pytest.raises(UsageError):
        gen_uniform(GenSpec("ss-simden", 10, 2))


def test_parse_gen():
    assert parse_gen("ss-varden:100:3:7") == GenSpec("ss-varden", 100, 3, 7)
    with pytest.raises(UsageError):
        parse_gen("uniform:100:3")
