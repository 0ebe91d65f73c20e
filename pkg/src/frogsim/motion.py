"""Brownian stepping with tunneling-safe first-entry detection into radius-r balls.

Hitting detection combines an adaptive step size (steps shrink near ball
surfaces) with a radial one-dimensional Brownian-bridge correction that
catches excursions dipping inside a ball between step endpoints. The
bridge rule is exact in d=1 and a documented radial approximation for
d >= 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "StepPolicy",
    "HitResult",
    "adaptive_dt",
    "bridge_hit_prob",
    "simulate_until_hit",
    "hit_times_single_ball",
]


@dataclass(frozen=True)
class StepPolicy:
    """Step-size and hit-detection knobs.

    dt = min(dt_max, (safety * dist)^2) keeps the per-axis RMS step at
    most safety times the distance to the nearest ball surface; dt_min
    floors the step so the clock always advances. At the defaults the
    per-step tunneling probability is below 1e-7.
    """

    dt_max: float = 1e-2
    safety: float = 0.25
    bridge_correction: bool = True
    tol_hit: float = 1e-9
    dt_min: float = 1e-8

    def __post_init__(self):
        if self.dt_max <= 0 or self.dt_min <= 0 or self.dt_min > self.dt_max:
            raise ValueError("require 0 < dt_min <= dt_max")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if self.tol_hit < 0:
            raise ValueError("tol_hit must be >= 0")


def adaptive_dt(dist_to_surface, policy: StepPolicy):
    """Step length for a particle at the given distance from the nearest ball surface.

    Accepts scalars or arrays. dt = min(dt_max, (safety*dist)^2), floored
    at dt_min so dist = 0 still advances the clock.
    """
    dist = np.maximum(np.asarray(dist_to_surface, dtype=float), 0.0)
    dt = np.minimum(policy.dt_max, np.square(policy.safety * dist))
    return np.maximum(dt, policy.dt_min)


def bridge_hit_prob(x0, x1, center, rho: float, dt):
    """Probability the Brownian bridge from x0 to x1 over dt dips within rho of center.

    Uses the 1-d reflection formula exp(-2*d0*d1/dt) on the signed
    surface distances d0 = |x0-center|-rho, d1 = |x1-center|-rho. Both
    endpoints are assumed outside the ball; negative inputs clamp to a
    certain hit. Accepts arrays broadcast along the leading axis.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    center = np.asarray(center, dtype=float)
    d0 = np.linalg.norm(np.atleast_2d(x0) - center, axis=-1) - rho
    d1 = np.linalg.norm(np.atleast_2d(x1) - center, axis=-1) - rho
    prob = np.exp(-2.0 * np.maximum(d0, 0.0) * np.maximum(d1, 0.0) / np.asarray(dt, dtype=float))
    return prob if prob.size > 1 else float(prob[0])


@dataclass(frozen=True)
class HitResult:
    """Outcome of a first-entry simulation: a hit or a timeout."""

    hit: bool
    time: float
    position: np.ndarray
    center_index: int | None = None

    @property
    def timed_out(self) -> bool:
        return not self.hit


def _segment_sphere_crossing(x0: np.ndarray, x1: np.ndarray, center: np.ndarray, rho: float) -> float | None:
    """Smallest s in [0,1] with |x0 + s*(x1-x0) - center| = rho, or None."""
    u = x1 - x0
    w = x0 - center
    a = float(u @ u)
    if a == 0.0:
        return None
    b = 2.0 * float(w @ u)
    c = float(w @ w) - rho * rho
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    sq = np.sqrt(disc)
    for s in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)):
        if 0.0 <= s <= 1.0:
            return float(s)
    return None


def _closest_approach(x0: np.ndarray, x1: np.ndarray, center: np.ndarray) -> float:
    """Parameter s in [0,1] of the segment point closest to center."""
    u = x1 - x0
    denom = float(u @ u)
    if denom == 0.0:
        return 0.0
    return float(np.clip(-((x0 - center) @ u) / denom, 0.0, 1.0))


# hit-scan margin: balls whose surface is farther than this from a step
# endpoint contribute bridge probability below exp(-16) ~ 1e-7 per step
def _scan_margin(policy: StepPolicy) -> float:
    return float(np.sqrt(8.0 * policy.dt_max))


def simulate_until_hit(
    start,
    sleeping,
    r: float,
    t_max: float,
    policy: StepPolicy,
    rng: np.random.Generator,
) -> HitResult:
    """Run one Brownian particle until it first enters any sleeping ball.

    ``sleeping`` may be an (n, d) coordinate array, a PointSet, or a
    SpatialGrid; a KD-tree is built over the centers. Increments are
    isotropic Gaussians of variance dt per axis. A hit is declared on a
    surface crossing (position interpolated onto the sphere) or on a
    Brownian-bridge correction success (position at the closest approach,
    projected radially). Deterministic given the generator.
    """
    x = np.atleast_1d(np.asarray(start, dtype=float)).copy()
    coords = getattr(sleeping, "coords", sleeping)
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, x.size)
    if coords.shape[0] == 0:
        x += rng.normal(0.0, np.sqrt(t_max), size=x.size)
        return HitResult(hit=False, time=t_max, position=x)
    tree = cKDTree(coords)
    dist0, _ = tree.query(x, k=1)
    if dist0 <= r + policy.tol_hit:
        raise ValueError("start position must be more than r from every sleeping center")
    margin = _scan_margin(policy)
    far_horizon = np.sqrt(policy.dt_max) / policy.safety
    t = 0.0
    dist = float(dist0)
    while t < t_max:
        dt = float(adaptive_dt(dist - r, policy))
        dt = min(dt, t_max - t)
        step = rng.normal(0.0, np.sqrt(dt), size=x.size)
        x1 = x + step
        d1, j1 = tree.query(x1, k=1)
        hit = _check_step_hits(x, x1, t, dt, tree, coords, r, margin, policy, rng)
        if hit is not None:
            return hit
        x = x1
        t += dt
        dist = float(d1)
        # a lower bound on the surface distance is enough while far away
        if dist - r > far_horizon + margin:
            dist_budget = dist - r - (far_horizon + margin)
            while t < t_max and dist_budget > 0:
                dt = min(policy.dt_max, t_max - t)
                step = rng.normal(0.0, np.sqrt(dt), size=x.size)
                x += step
                t += dt
                dist_budget -= float(np.linalg.norm(step))
            dist, _ = tree.query(x, k=1)
            dist = float(dist)
    return HitResult(hit=False, time=t_max, position=x)


def _check_step_hits(x0, x1, t, dt, tree, coords, r, margin, policy, rng) -> HitResult | None:
    """First entry along one step, if any: crossings first, then bridge thinning."""
    cand = tree.query_ball_point(x1, r + margin)
    if not cand:
        return None
    best: tuple[float, int, np.ndarray] | None = None
    for j in cand:
        c = coords[j]
        d0 = float(np.linalg.norm(x0 - c))
        d1 = float(np.linalg.norm(x1 - c))
        if d0 <= r:  # already inside: caller tracks first entries, skip
            continue
        if d1 <= r:
            s = _segment_sphere_crossing(x0, x1, c, r)
            s = 0.0 if s is None else s
            pos = x0 + s * (x1 - x0)
            cand_hit = (t + s * dt, j, pos)
        elif policy.bridge_correction:
            p = np.exp(-2.0 * (d0 - r) * (d1 - r) / dt)
            if p > 1e-12 and rng.random() < p:
                s = _closest_approach(x0, x1, c)
                pos = x0 + s * (x1 - x0)
                # report on the sphere surface along the radial direction
                direction = pos - c
                nrm = np.linalg.norm(direction)
                pos = c + direction * (r / nrm) if nrm > 0 else c + np.eye(len(c))[0] * r
                cand_hit = (t + s * dt, j, pos)
            else:
                continue
        else:
            continue
        if best is None or cand_hit[0] < best[0] or (cand_hit[0] == best[0] and cand_hit[1] < best[1]):
            best = cand_hit
    if best is None:
        return None
    t_hit, j, pos = best
    return HitResult(hit=True, time=float(t_hit), position=np.asarray(pos), center_index=int(j))


def hit_times_single_ball(
    start_distance: float,
    r: float,
    dim: int,
    t_max: float,
    policy: StepPolicy,
    rng: np.random.Generator,
    replicas: int,
) -> np.ndarray:
    """Vectorized first-entry times against one ball for many independent particles.

    Particles start at distance ``start_distance`` from a ball of radius
    ``r`` centered at the origin. Applies the same adaptive-step and
    bridge rules as :func:`simulate_until_hit`, advanced for a whole
    ensemble at once. Returns an array of hit times with +inf marking
    timeouts.
    """
    if start_distance <= r:
        raise ValueError("start must be outside the ball")
    pos = np.zeros((replicas, dim))
    pos[:, 0] = start_distance
    t = np.zeros(replicas)
    times = np.full(replicas, np.inf)
    alive = np.arange(replicas)
    while alive.size:
        d0 = np.linalg.norm(pos[alive], axis=1)
        dt = adaptive_dt(d0 - r, policy)
        dt = np.minimum(dt, t_max - t[alive])
        step = rng.normal(size=(alive.size, dim)) * np.sqrt(dt)[:, None]
        new = pos[alive] + step
        d1 = np.linalg.norm(new, axis=1)
        s_in = d1 <= r
        p_bridge = np.where(
            s_in, 1.0, np.exp(-2.0 * np.maximum(d0 - r, 0) * np.maximum(d1 - r, 0) / dt)
        )
        if policy.bridge_correction:
            hit_now = rng.random(alive.size) < p_bridge
        else:
            hit_now = s_in
        # hit time interpolated onto the crossing for surface entries,
        # mid-step for bridge hits (exact split is immaterial at dt scale)
        frac = np.where(s_in, _crossing_fraction(d0, d1, r), 0.5)
        times[alive[hit_now]] = t[alive[hit_now]] + frac[hit_now] * dt[hit_now]
        t[alive] += dt
        pos[alive] = new
        still = ~hit_now & (t[alive] < t_max - 1e-15)
        alive = alive[still]
    return times


def _crossing_fraction(d0: np.ndarray, d1: np.ndarray, r: float) -> np.ndarray:
    """Linear-in-radial-distance estimate of where the step crossed the surface."""
    denom = np.maximum(d0 - d1, 1e-300)
    return np.clip((d0 - r) / denom, 0.0, 1.0)
