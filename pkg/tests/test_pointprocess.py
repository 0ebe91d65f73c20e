"""Poisson sampling and spatial-grid correctness against brute-force oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frogsim.pointprocess import ConfigurationError, Region, SpatialGrid, build_grid, sample_ppp
from frogsim.rng import substream


def brute_force_within(coords, x, rho):
    if len(coords) == 0:
        return []
    d = np.linalg.norm(coords - np.asarray(x), axis=1)
    idx = np.nonzero(d <= rho)[0]
    order = np.lexsort((idx, d[idx]))
    return [(int(i), float(dd)) for i, dd in zip(idx[order], d[idx][order])]


def test_zero_intensity_is_empty():
    region = Region([0.0, 0.0], [10.0, 10.0])
    ps = sample_ppp(region, 0.0, substream(1, "zero"))
    assert len(ps) == 0


def test_mean_count_excludes_ball_volume():
    region = Region([-5, -5], [5, 5], excluded_ball=(np.zeros(2), 1.0))
    rng = substream(2, "mean")
    counts = [len(sample_ppp(region, 1.0, rng)) for _ in range(3000)]
    expect = 100 - np.pi
    # 3 sigma band for the Monte Carlo mean of a Poisson(100 - pi)
    assert abs(np.mean(counts) - expect) < 3 * np.sqrt(expect / len(counts))


def test_count_variance_matches_poisson_mean():
    region = Region([0, 0], [10, 10])
    rng = substream(3, "var")
    counts = np.array([rng.poisson(region.volume()) for _ in range(10_000)])
    assert abs(counts.var(ddof=1) - 100.0) / 100.0 < 0.05


def test_exclusion_invariant_holds_on_every_sample():
    region = Region([-4, -4, -4], [4, 4, 4], excluded_ball=(np.zeros(3), 1.2))
    rng = substream(4, "excl")
    for _ in range(50):
        ps = sample_ppp(region, 1.0, rng)
        ps.validate()
        if len(ps):
            assert np.linalg.norm(ps.coords, axis=1).min() > 1.2


def test_determinism_bit_for_bit():
    region = Region([-3, -3], [3, 3])
    a = sample_ppp(region, 2.0, substream(9, "det"))
    b = sample_ppp(region, 2.0, substream(9, "det"))
    assert np.array_equal(a.coords, b.coords)


def test_degenerate_region_rejected():
    with pytest.raises(ConfigurationError):
        Region([0, 0], [0, 1])
    with pytest.raises(ConfigurationError):
        Region([0, 0], [1, 1], excluded_ball=(np.array([0.0, 0.0]), 0.9))  # straddles boundary
    region = Region([0, 0], [1, 1])
    with pytest.raises(ConfigurationError):
        sample_ppp(region, float("nan"), substream(1, "bad"))
    with pytest.raises(ConfigurationError):
        sample_ppp(region, -1.0, substream(1, "bad"))


def test_volume_with_interior_ball():
    region = Region([-5, -5], [5, 5], excluded_ball=(np.array([1.0, 1.0]), 2.0))
    assert region.volume() == pytest.approx(100 - np.pi * 4)


def test_grid_empty_pointset_has_no_buckets():
    grid = build_grid(np.empty((0, 2)), 1.0)
    assert grid.buckets == {}
    assert grid.query_within([0.0, 0.0], 5.0) == []


def test_grid_single_point_bucket():
    grid = build_grid(np.array([[0.5, 0.5]]), 1.0)
    assert set(grid.buckets) == {(0, 0)}
    assert grid.query_within([0.0, 0.0], 1.0) == [(0, pytest.approx(np.hypot(0.5, 0.5)))]


def test_query_radius_zero_misses_everything_else():
    grid = build_grid(np.array([[1.0, 2.0]]), 1.0)
    assert grid.query_within([0.0, 0.0], 0.0) == []


def test_query_hand_example():
    grid = build_grid(np.array([[0.0, 0.0], [3.0, 0.0]]), 1.5)
    res = grid.query_within([1.0, 0.0], 1.5)
    assert res == [(0, pytest.approx(1.0))]


def test_query_matches_brute_force_on_random_instances():
    rng = substream(7, "oracle")
    coords = rng.uniform(-10, 10, size=(1000, 2))
    grid = build_grid(coords, 0.8)
    for _ in range(100):
        x = rng.uniform(-11, 11, size=2)
        rho = rng.uniform(0, 3.0)
        assert grid.query_within(x, rho) == pytest.approx(brute_force_within(coords, x, rho))


def test_nearest_matches_brute_force():
    rng = substream(8, "near")
    coords = rng.uniform(-5, 5, size=(300, 3))
    grid = build_grid(coords, 0.9)
    for _ in range(60):
        x = rng.uniform(-6, 6, size=3)
        d = np.linalg.norm(coords - x, axis=1)
        j = int(np.argmin(d))
        got = grid.nearest(x, upper_bound=8.0)
        if d[j] <= 8.0:
            assert got == (j, pytest.approx(d[j]))
        else:
            assert got is None


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(0, 60),
    cell=st.floats(0.2, 2.5),
    rho=st.floats(0.0, 3.0),
    seed=st.integers(0, 10_000),
)
def test_grid_equivalence_property(n, cell, rho, seed):
    rng = substream(seed, "hyp")
    coords = rng.uniform(-4, 4, size=(n, 2))
    grid = build_grid(coords, cell)
    x = rng.uniform(-5, 5, size=2)
    assert grid.query_within(x, rho) == pytest.approx(brute_force_within(coords, x, rho))


def test_count_law_chi_square():
    # quick version of the acceptance GOF: 4000 replicas on a small region
    from frogsim.stats import chi_square_poisson_gof

    region = Region([0, 0], [3, 3])
    rng = substream(11, "gof")
    counts = np.array([len(sample_ppp(region, 1.0, rng)) for _ in range(4000)])
    _, p, _ = chi_square_poisson_gof(counts, region.volume())
    assert p > 0.01
