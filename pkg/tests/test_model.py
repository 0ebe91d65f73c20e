"""Frog-model dynamics: cluster waking, monotone growth, snapshots, passage times."""
import numpy as np
import pytest
from scipy import stats as sps

from frogsim.model import (
    FrontSeries,
    SimState,
    front_series,
    init_sim,
    make_sim,
    passage_times_along_ray,
    ray_targets,
    snapshot,
)
from frogsim.motion import StepPolicy
from frogsim.percolation import clusters
from frogsim.pointprocess import ConfigurationError, PointSet, Region
from frogsim.rng import substream


def explicit_sim(coords, r, seed=0, box=12.0, **kwargs):
    region = Region([-box, -box], [box, box], excluded_ball=(np.zeros(2), r))
    ps = PointSet(np.asarray(coords, dtype=float), region)
    return make_sim(ps, r, seed, **kwargs)


def test_empty_configuration_only_origin_forever():
    region = Region([-2, -2], [2, 2], excluded_ball=(np.zeros(2), 0.5))
    sim = make_sim(PointSet(np.empty((0, 2)), region), 0.5, seed=1)
    events = sim.advance(3.0)
    assert events == []
    xi, act = snapshot(sim)
    assert len(xi) == 0 and len(act) == 1


def test_no_point_within_r_of_origin_at_start():
    for seed in range(5):
        sim = init_sim(box_side=12.0, r=0.8, d=2, seed=seed)
        if len(sim.points):
            assert np.linalg.norm(sim.coords, axis=1).min() > 0.8


def test_invalid_dimensions_rejected():
    with pytest.raises(ConfigurationError):
        init_sim(box_side=10.0, r=0.5, d=4, seed=0)
    with pytest.raises(ConfigurationError):
        init_sim(box_side=1.0, r=0.5, d=2, seed=0)  # box_side <= 4r


def test_cluster_precomputation_matches_percolation():
    sim = init_sim(box_side=16.0, r=0.9, d=2, seed=3)
    fresh = clusters(sim.points, 0.9)
    assert np.array_equal(sim.clustering.labels, fresh.labels)


def test_single_cluster_wakes_atomically():
    # 3-chain within reach of the origin frog
    coords = [[1.0, 0.0], [1.8, 0.0], [2.5, 0.0], [9.0, 9.0]]
    sim = explicit_sim(coords, r=0.9, seed=5)
    events = []
    while not events and sim.clock < 50.0:
        events = sim.advance(sim.clock + 1.0, stop_after_first_event=True)
    assert len(events) == 1
    ev = events[0]
    assert ev.cluster_size == 3
    assert sorted(sim.clustering.members[ev.cluster_id].tolist()) == [0, 1, 2]
    assert sim.awake[:3].all() and not sim.awake[3]
    assert np.unique(sim.wake_time[:3]).size == 1  # identical wake instant
    xi, act = snapshot(sim)
    assert len(xi) == 3 and len(act) == 4


def test_snapshot_at_time_zero():
    sim = init_sim(box_side=12.0, r=0.7, d=2, seed=8)
    xi, act = snapshot(sim)
    assert len(xi) == 0
    assert len(act) == 1 and np.allclose(act[0], 0.0)


def test_active_count_tracks_awake_count():
    sim = init_sim(box_side=14.0, r=0.8, d=2, seed=9)
    for t in (0.5, 1.0, 2.0, 4.0):
        sim.advance(t)
        xi, act = snapshot(sim)
        assert len(act) == len(xi) + 1


def test_monotone_growth_and_event_atomicity():
    sim = init_sim(box_side=14.0, r=0.8, d=2, seed=10)
    seen = set()
    for t in np.arange(0.5, 6.0, 0.5):
        events = sim.advance(t)
        for ev in events:
            members = sim.clustering.members[ev.cluster_id]
            assert not (set(members.tolist()) & seen)  # never re-wakes
            seen.update(members.tolist())
        assert set(sim.activated_indices().tolist()) == seen
    times = sim.wake_time[sorted(seen)]
    assert np.all(times[np.isfinite(times)] >= 0)


def test_events_in_time_order_with_deterministic_tiebreak():
    sim = init_sim(box_side=16.0, r=0.9, d=2, seed=11)
    events = sim.advance(6.0)
    times = [ev.time for ev in events]
    assert times == sorted(times)


def test_front_series_single_frog_running_max():
    region = Region([-5, -5], [5, 5], excluded_ball=(np.zeros(2), 0.5))
    sim = make_sim(PointSet(np.empty((0, 2)), region), 0.5, seed=12)
    ser = front_series(sim, t_end=2.0, sample_dt=0.1)
    assert np.all(np.diff(ser.front) >= 0)  # running max of the path's x coordinate
    assert ser.front[-1] > 0


def test_front_series_monotone_and_strictly_increasing_times():
    sim = init_sim(box_side=14.0, r=0.8, d=2, seed=13)
    ser = front_series(sim, t_end=2.0, sample_dt=0.25)
    assert np.all(np.diff(ser.times) > 0)
    assert np.all(np.diff(ser.front) >= 0)
    with pytest.raises(ValueError):
        FrontSeries(times=np.array([1.0, 1.0]), front=np.array([0.0, 0.0]))


def test_boundary_exit_flag():
    region = Region([-1.5, -1.5], [1.5, 1.5], excluded_ball=(np.zeros(2), 0.3))
    sim = make_sim(PointSet(np.empty((0, 2)), region), 0.3, seed=14)
    sim.advance(20.0)  # a Brownian path leaves a 1.5-box well before t = 20
    assert sim.boundary_exit


def test_passage_targets_and_shared_cluster_times():
    # x1 and x2 share a cluster: their passage times coincide
    coords = [[1.0, 0.0], [1.9, 0.0], [7.0, 0.0]]
    sim = explicit_sim(coords, r=1.0, seed=15)
    samples, flags = passage_times_along_ray(sim, np.array([1.0, 0.0]), n_max=2, t_cap=80.0)
    by_n = {s.n: s for s in samples}
    assert by_n[1].target_index == 0 and by_n[2].target_index == 1
    assert by_n[1].awake and by_n[2].awake
    assert by_n[1].passage_time == by_n[2].passage_time


def test_passage_partial_flag_at_tiny_cap():
    sim = init_sim(box_side=30.0, r=0.6, d=2, seed=16)
    samples, flags = passage_times_along_ray(sim, np.array([1.0, 0.0]), n_max=10, t_cap=0.02)
    assert flags["partial"] or all(s.awake for s in samples)


def test_margin_warning_for_small_box():
    sim = init_sim(box_side=24.0, r=0.8, d=2, seed=17)
    _, flags = passage_times_along_ray(sim, np.array([1.0, 0.0]), n_max=10, t_cap=0.01)
    assert flags["margin_warning"]  # margin 2 < 10 r


def test_ray_targets_nearest_points():
    sim = init_sim(box_side=20.0, r=0.5, d=2, seed=18)
    targets = ray_targets(sim, np.array([1.0, 0.0]), 3)
    for n, idx in enumerate(targets, start=1):
        d = np.linalg.norm(sim.coords - np.array([n, 0.0]), axis=1)
        assert d[idx] == d.min()


def test_subadditivity_of_mean_passage_times():
    # restart half-way: mean T(0, x_n) <= mean T(0, x_m) + mean T'(x_m, x_n)
    m, n = 3, 6
    t_full, t_first, t_second = [], [], []
    for seed in range(40):
        sim = explicit_sim_random(seed)
        samples, _ = passage_times_along_ray(sim, np.array([1.0, 0.0]), n_max=n, t_cap=120.0)
        by_n = {s.n: s for s in samples}
        if not (by_n[m].awake and by_n[n].awake):
            continue
        t_full.append(by_n[n].passage_time)
        t_first.append(by_n[m].passage_time)
        # restart from x_m alone over the same configuration
        sim2 = explicit_sim_random(seed)
        shift = sim2.coords[by_n[m].target_index].copy()
        coords = np.delete(sim2.coords, by_n[m].target_index, axis=0) - shift
        keep = np.linalg.norm(coords, axis=1) > sim2.r
        region = Region(sim2.points.region.box_lo - shift, sim2.points.region.box_hi - shift,
                        excluded_ball=(np.zeros(2), sim2.r))
        sim3 = make_sim(PointSet(coords[keep], region), sim2.r, seed=seed + 9000)
        tgt = np.argmin(np.linalg.norm(coords[keep] - (sim2.coords[by_n[n].target_index] - shift), axis=1))
        while sim3.clock < 120.0 and not sim3.awake[tgt]:
            sim3.advance(sim3.clock + 1.0)
        if sim3.awake[tgt]:
            t_second.append(sim3.wake_time[tgt])
    assert len(t_full) >= 25
    lhs = np.mean(t_full)
    rhs = np.mean(t_first) + np.mean(t_second)
    se = np.std(t_full, ddof=1) / np.sqrt(len(t_full)) + np.std(t_second, ddof=1) / np.sqrt(len(t_second))
    assert lhs <= rhs + 3 * se


def explicit_sim_random(seed):
    from frogsim.pointprocess import sample_ppp

    region = Region([-4, -4], [10, 4], excluded_ball=(np.zeros(2), 0.7))
    ps = sample_ppp(region, 1.0, substream(seed, "sub-ppp"))
    return make_sim(ps, 0.7, seed=seed)


def test_first_wake_time_stable_under_dt_halving():
    # distribution of the first wake time barely moves when dt_max halves
    def first_wakes(dt, tag, n):
        out = []
        for seed in range(n):
            sim = init_sim(box_side=10.0, r=0.7, d=2, seed=seed, policy=StepPolicy(dt_max=dt))
            ev = sim.advance(30.0, stop_after_first_event=True)
            if ev:
                out.append(ev[0].time)
        return np.array(out)

    a = first_wakes(1e-2, "a", 400)
    b = first_wakes(5e-3, "b", 400)
    ks = sps.ks_2samp(a, b)
    assert ks.pvalue > 0.01


def test_frozen_after_wake_keeps_centers_fixed():
    coords = [[1.0, 0.0], [1.8, 0.0], [9.0, 9.0]]
    sim = explicit_sim(coords, r=0.9, seed=19, frozen_after_wake=True)
    sim.advance(8.0)
    if sim.awake[0]:
        rows = [k for k in range(sim.n_active) if sim.ids[k] == 0]
        assert np.allclose(sim.pos[rows[0]], coords[0])


def test_full_wake_time_scaling():
    # rescaled by n^(2+eps) the full-wake time shrinks with n (linear growth)
    ratios = []
    for n in (5.0, 10.0):
        sim = init_sim(box_side=2 * n, r=0.8, d=2, seed=21)
        t_cap = 40.0
        while sim.clock < t_cap and not sim.awake.all():
            sim.advance(sim.clock + 1.0)
        assert sim.awake.all(), "box should fully wake at this radius"
        t_full = np.nanmax(sim.wake_time)
        ratios.append(t_full / n**2.2)
    assert ratios[1] < ratios[0] * 1.5


def test_determinism_of_advance():
    a = init_sim(box_side=12.0, r=0.8, d=2, seed=22)
    b = init_sim(box_side=12.0, r=0.8, d=2, seed=22)
    ea = a.advance(2.0)
    eb = b.advance(2.0)
    assert [(e.time, e.frog_id, e.cluster_id) for e in ea] == [(e.time, e.frog_id, e.cluster_id) for e in eb]
    assert np.array_equal(a.pos[: a.n_active], b.pos[: b.n_active])
