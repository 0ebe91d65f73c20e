"""Hitting-engine checks: step policy algebra, bridge rule, closed-form laws."""
import numpy as np
import pytest
from scipy import stats as sps
from scipy.stats import norm

from frogsim.motion import (
    HitResult,
    StepPolicy,
    adaptive_dt,
    bridge_hit_prob,
    hit_times_single_ball,
    simulate_until_hit,
)
from frogsim.rng import substream


def test_adaptive_dt_caps_and_floors():
    pol = StepPolicy(dt_max=1.0, safety=0.25)
    assert adaptive_dt(1e9, pol) == 1.0  # cap
    assert adaptive_dt(0.0, pol) == pol.dt_min  # floor
    assert adaptive_dt(2.0, pol) == pytest.approx(0.25)  # (0.25 * 2)^2


def test_adaptive_dt_vectorized():
    pol = StepPolicy(dt_max=1.0, safety=0.5)
    out = adaptive_dt(np.array([0.0, 1.0, 100.0]), pol)
    assert out == pytest.approx([pol.dt_min, 0.25, 1.0])


def test_policy_validation():
    with pytest.raises(ValueError):
        StepPolicy(dt_max=-1)
    with pytest.raises(ValueError):
        StepPolicy(safety=1.5)
    with pytest.raises(ValueError):
        StepPolicy(dt_min=1.0, dt_max=0.1)


def test_bridge_prob_boundary_case_is_one():
    # starting on the surface: d0 = 0
    p = bridge_hit_prob(np.array([1.0, 0.0]), np.array([2.0, 0.0]), np.zeros(2), 1.0, 0.01)
    assert p == pytest.approx(1.0)


def test_bridge_prob_vanishes_with_dt():
    x0, x1, c = np.array([2.0, 0.0]), np.array([2.1, 0.0]), np.zeros(2)
    assert bridge_hit_prob(x0, x1, c, 1.0, 1e-6) < 1e-200
    assert bridge_hit_prob(x0, x1, c, 1.0, 1e-2) > 0


def test_start_on_surface_rejected():
    with pytest.raises(ValueError):
        simulate_until_hit(np.array([1.0, 0.0]), np.zeros((1, 2)), 1.0, 1.0,
                           StepPolicy(), substream(0, "pre"))


def test_timeout_without_centers():
    res = simulate_until_hit(np.zeros(2), np.empty((0, 2)), 0.5, 2.0, StepPolicy(), substream(1, "to"))
    assert res.timed_out and res.time == 2.0


def test_single_particle_hit_reports_surface_position():
    rng = substream(2, "surf")
    centers = np.array([[1.5, 0.0]])
    pol = StepPolicy()
    hits = 0
    for k in range(40):
        res = simulate_until_hit(np.zeros(2), centers, 0.5, 50.0, pol, substream(k, "surf"))
        if res.hit:
            hits += 1
            assert np.linalg.norm(res.position - centers[0]) <= 0.5 + 1e-6
            assert res.time <= 50.0
    assert hits > 20


def test_d1_law_matches_reflection_principle():
    # P[hit by t] = 2(1 - Phi(a / sqrt(t))) for a single absorbing surface
    pol = StepPolicy()
    times = hit_times_single_ball(2.0, 0.5, 1, 4.0, pol, substream(3, "d1"), replicas=20_000)
    a = 1.5
    grid = np.linspace(0.25, 4.0, 16)
    emp = np.array([(times <= t).mean() for t in grid])
    exact = 2 * (1 - norm.cdf(a / np.sqrt(grid)))
    assert np.abs(emp - exact).max() < 0.03


def test_ensemble_and_single_particle_agree():
    pol = StepPolicy()
    ens = hit_times_single_ball(1.2, 0.4, 1, 3.0, pol, substream(4, "ens"), replicas=4000)
    ens = ens[np.isfinite(ens)]
    single = []
    for k in range(800):
        res = simulate_until_hit(np.array([1.2]), np.array([[0.0]]), 0.4, 3.0, pol,
                                 substream(k, "sing"))
        if res.hit:
            single.append(res.time)
    ks = sps.ks_2samp(ens, np.array(single))
    assert ks.pvalue > 0.01


def test_rotation_invariance_of_hit_times():
    pol = StepPolicy()
    pol_off = StepPolicy()
    t_x = []
    t_diag = []
    for k in range(1500):
        res = simulate_until_hit(np.zeros(2), np.array([[1.4, 0.0]]), 0.6, 6.0, pol,
                                 substream(k, "rot-x"))
        if res.hit:
            t_x.append(res.time)
        diag = 1.4 / np.sqrt(2)
        res = simulate_until_hit(np.zeros(2), np.array([[diag, diag]]), 0.6, 6.0, pol_off,
                                 substream(k, "rot-d"))
        if res.hit:
            t_diag.append(res.time)
    ks = sps.ks_2samp(np.array(t_x), np.array(t_diag))
    assert ks.pvalue > 0.01


def test_brownian_scaling_of_hit_times():
    # (lengths, times) -> (2 lengths, 4 times) leaves the law invariant
    pol = StepPolicy()
    base = hit_times_single_ball(1.0, 0.4, 2, 5.0, pol, substream(5, "sc1"), replicas=4000)
    pol2 = StepPolicy(dt_max=4e-2)  # rescale the step cap with time
    scaled = hit_times_single_ball(2.0, 0.8, 2, 20.0, pol2, substream(6, "sc2"), replicas=4000)
    ks = sps.ks_2samp(base[np.isfinite(base)], scaled[np.isfinite(scaled)] / 4.0)
    assert ks.pvalue > 0.01


def test_bridge_correction_matters():
    # without the bridge, tunneling inflates apparent survival
    pol_on = StepPolicy(dt_max=0.05, safety=1.0)
    pol_off = StepPolicy(dt_max=0.05, safety=1.0, bridge_correction=False)
    t_on = hit_times_single_ball(1.5, 0.5, 1, 3.0, pol_on, substream(7, "bon"), replicas=6000)
    t_off = hit_times_single_ball(1.5, 0.5, 1, 3.0, pol_off, substream(8, "boff"), replicas=6000)
    assert np.isfinite(t_on).mean() > np.isfinite(t_off).mean() + 0.02


def test_hit_result_shape():
    res = HitResult(hit=False, time=1.0, position=np.zeros(2))
    assert res.timed_out and res.center_index is None
