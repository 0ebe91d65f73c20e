"""The Brownian frog model: sleeping Poisson points, cluster waking, active diffusion.

One active particle starts at the origin among sleeping particles at the
points of a unit-intensity Poisson process (origin ball excluded). Active
particles diffuse; when one first comes within r of a sleeping center the
whole percolation cluster of that center wakes at that instant, each
member starting from its own center. Waking is the only interaction, so
frogs advance independently inside synchronized epochs of length dt_max
and wake events are merged through a time-ordered queue.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import motion
from .motion import StepPolicy, adaptive_dt
from .percolation import ClusterLabeling, clusters
from .pointprocess import ConfigurationError, PointSet, Region, SpatialGrid, build_grid, sample_ppp
from .rng import substream

__all__ = [
    "WakeEvent",
    "FrontSeries",
    "PassageSample",
    "SimState",
    "init_sim",
    "make_sim",
    "advance",
    "snapshot",
    "front_series",
    "passage_times_along_ray",
]

ORIGIN_ID = -1


@dataclass(frozen=True)
class WakeEvent:
    time: float
    frog_id: int  # the active frog whose contact woke the cluster
    cluster_id: int
    cluster_size: int


@dataclass
class FrontSeries:
    """Running right-front samples: R_t is the largest first coordinate ever
    attained by an awake frog up to each sample time."""

    times: np.ndarray
    front: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.front = np.asarray(self.front, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")


@dataclass(frozen=True)
class PassageSample:
    n: int
    target_index: int
    target: np.ndarray
    passage_time: float  # nan while the target cluster is still asleep
    awake: bool


class SimState:
    """Full frog-model state over one sampled configuration."""

    def __init__(
        self,
        points: PointSet,
        r: float,
        policy: StepPolicy,
        rng: np.random.Generator,
        frozen_after_wake: bool = False,
    ):
        if r <= 0:
            raise ConfigurationError(f"interaction radius must be positive, got {r}")
        self.points = points
        self.r = float(r)
        self.policy = policy
        self.rng = rng
        # diagnostic mode: woken frogs stay at their centers; only the
        # origin frog diffuses (negative control for the local limit)
        self.frozen_after_wake = frozen_after_wake
        self.coords = points.coords
        self.dim = points.dim
        n = len(points)
        self.clustering: ClusterLabeling = clusters(points, r) if n else ClusterLabeling(
            labels=np.empty(0, dtype=np.int64), members=[], connection_radius=float(r)
        )
        self.awake = np.zeros(n, dtype=bool)
        self.wake_time = np.full(n, np.nan)
        self.cluster_awake = np.zeros(self.clustering.n_clusters, dtype=bool)
        self.clock = 0.0
        self.events: list[WakeEvent] = []
        self.boundary_exit = False
        # active-frog arrays in arrival order; origin frog first
        self.pos = np.zeros((n + 1, self.dim))
        self.ids = np.empty(n + 1, dtype=np.int64)
        self.ids[0] = ORIGIN_ID
        self.n_active = 1
        self.front_max = 0.0
        self.rear_min = 0.0
        # cached lower bounds on distance to the nearest sleeping center
        self._bound = np.zeros(n + 1)
        self._tree: cKDTree | None = None
        self._tree_ids: np.ndarray | None = None
        self._tree_dirty = True
        self._need_clear = np.sqrt(policy.dt_max) / policy.safety + np.sqrt(8.0 * policy.dt_max)
        self._query_cap = self.r + self._need_clear + 4.0
        self._refresh_bounds(np.array([0]))

    # -- sleeping-set index ------------------------------------------------

    def sleeping_indices(self) -> np.ndarray:
        return np.nonzero(~self.awake)[0]

    def sleeping_grid(self) -> SpatialGrid:
        """Grid over the currently sleeping centers (cell size r)."""
        return build_grid(self.coords[self.sleeping_indices()], self.r)

    def _ensure_tree(self) -> None:
        if self._tree_dirty:
            idx = self.sleeping_indices()
            self._tree_ids = idx
            self._tree = cKDTree(self.coords[idx]) if idx.size else None
            self._tree_dirty = False

    def _refresh_bounds(self, rows: np.ndarray) -> None:
        """Recompute distance bounds for the given active rows (batch query)."""
        self._ensure_tree()
        if self._tree is None:
            self._bound[rows] = np.inf
            return
        d, _ = self._tree.query(self.pos[rows], k=1, distance_upper_bound=self._query_cap)
        self._bound[rows] = np.where(np.isfinite(d), d, self._query_cap)

    def _masked_nearest(self, pts: np.ndarray) -> np.ndarray:
        """Step-sizing distance: nearest sleeping center each point is still outside of.

        Centers woken earlier in the epoch are masked out, and so are
        balls the point is already inside (their entry event is queued;
        resolving them finer serves nothing and would pin dt at the
        floor). Falls back to the k-th distance as a lower bound when all
        k nearest are masked.
        """
        if self._tree is None:
            return np.full(pts.shape[0], np.inf)
        k = min(8, len(self._tree_ids))
        d, j = self._tree.query(pts, k=k, distance_upper_bound=self._query_cap)
        d = d.reshape(pts.shape[0], k)
        j = j.reshape(pts.shape[0], k)
        valid = np.isfinite(d)
        usable = valid & (d > self.r)
        usable[valid] &= ~self.awake[self._tree_ids[j[valid]]]
        out = np.full(pts.shape[0], self._query_cap)
        first = usable.argmax(axis=1)
        has = usable.any(axis=1)
        rows = np.nonzero(has)[0]
        out[rows] = d[rows, first[rows]]
        for row in np.nonzero(~has)[0]:
            if not valid[row].any():
                continue  # nothing within the query cap
            # every visible neighbor is awake or already entered; the k-th
            # distance bounds anything beyond it
            dk = d[row, valid[row]][-1]
            out[row] = max(dk, self.r + self._exhausted_gap(pts[row]))
        return out

    def _exhausted_gap(self, x: np.ndarray) -> float:
        """Exact sizing clearance when the k-nearest view is all masked (rare)."""
        if self._tree is None:
            return np.inf
        idx = self._tree.query_ball_point(x, self.r + self._need_clear)
        best = np.inf
        for jt in idx:
            g = int(self._tree_ids[jt])
            if self.awake[g]:
                continue
            dist = float(np.linalg.norm(x - self.coords[g]))
            if dist > self.r:
                best = min(best, dist - self.r)
        return best if np.isfinite(best) else self._need_clear

    # -- state summaries ---------------------------------------------------

    @property
    def n_awake(self) -> int:
        return int(self.awake.sum())

    def active_positions(self) -> np.ndarray:
        return self.pos[: self.n_active].copy()

    def activated_indices(self) -> np.ndarray:
        return np.nonzero(self.awake)[0]

    def out_radius(self) -> float:
        idx = self.activated_indices()
        if idx.size == 0:
            return 0.0
        return float(np.linalg.norm(self.coords[idx], axis=1).max())

    def in_radius(self) -> float:
        """Largest rho with every configuration point inside B(0, rho) awake."""
        if len(self.points) == 0:
            return float(np.min(np.minimum(-self.points.region.box_lo, self.points.region.box_hi)))
        norms = np.linalg.norm(self.coords, axis=1)
        order = np.argsort(norms, kind="stable")
        asleep = ~self.awake[order]
        first = np.argmax(asleep) if asleep.any() else None
        if first is None:
            return float(np.min(np.minimum(-self.points.region.box_lo, self.points.region.box_hi)))
        return float(norms[order[first]])

    # -- dynamics ----------------------------------------------------------

    def advance(
        self,
        t_end: float,
        stop_after_first_event: bool = False,
        stop_when_front_exceeds: float | None = None,
    ) -> list[WakeEvent]:
        """Advance every active frog to t_end, waking clusters on first contact.

        Returns the wake events of this call in time order. Timeouts are
        normal; the clock simply reaches t_end.
        """
        if t_end < self.clock - 1e-12:
            raise ValueError("t_end must not precede the current clock")
        out: list[WakeEvent] = []
        while self.clock < t_end - 1e-12:
            epoch_end = min(self.clock + self.policy.dt_max, t_end)
            epoch_events = self._run_epoch(epoch_end)
            out.extend(epoch_events)
            self.clock = epoch_end
            m = self.n_active
            self.front_max = max(self.front_max, float(self.pos[:m, 0].max()))
            self.rear_min = min(self.rear_min, float(self.pos[:m, 0].min()))
            if not self.boundary_exit:
                lo, hi = self.points.region.box_lo, self.points.region.box_hi
                if np.any(self.pos[:m] < lo) or np.any(self.pos[:m] > hi):
                    self.boundary_exit = True
            if stop_after_first_event and out:
                break
            if stop_when_front_exceeds is not None and self.front_max >= stop_when_front_exceeds:
                break
        self.events.extend(out)
        return out

    def _run_epoch(self, epoch_end: float) -> list[WakeEvent]:
        t0 = self.clock
        h = epoch_end - t0
        m = self.n_active
        self._ensure_tree()
        rows = np.arange(m) if not self.frozen_after_wake else np.array([0])
        stale = self._bound[rows] < self.r + self._need_clear
        if stale.any():
            self._refresh_bounds(rows[stale])
        near = self._bound[rows] < self.r + self._need_clear
        far = rows[~near]
        if far.size:
            steps = self.rng.normal(size=(far.size, self.dim)) * np.sqrt(h)
            self.pos[far] += steps
            self._bound[far] -= np.linalg.norm(steps, axis=1)
        heap: list[tuple[float, int, int]] = []
        if near.any():
            self._advance_near(rows[near], t0, epoch_end, heap)
        return self._process_wakes(heap, epoch_end)

    def _advance_near(self, rows: np.ndarray, t_start, epoch_end: float, heap) -> None:
        """Sub-step frogs that are close to sleeping balls; push contact events.

        Used both for the epoch-start frontier and for frogs woken
        mid-epoch (which join at their wake time).
        """
        k = rows.size
        tau = np.full(k, float(t_start))
        live = np.arange(k)
        margin = np.sqrt(8.0 * self.policy.dt_max)
        while live.size:
            pts = self.pos[rows[live]]
            d_near = self._masked_nearest(pts)
            dt = adaptive_dt(d_near - self.r, self.policy)
            dt = np.minimum(dt, epoch_end - tau[live])
            steps = self.rng.normal(size=(live.size, self.dim)) * np.sqrt(dt)[:, None]
            new = pts + steps
            if self._tree is not None:
                scan = self._tree.query_ball_point(new, self.r + margin)
                for i in range(live.size):
                    if not scan[i]:
                        continue
                    self._scan_candidates(
                        rows[live[i]], pts[i], new[i], tau[live[i]], dt[i], sorted(scan[i]), heap
                    )
            self.pos[rows[live]] = new
            tau[live] += dt
            live = live[tau[live] < epoch_end - 1e-15]
        self._bound[rows] = 0.0  # force a fresh query next epoch

    def _scan_candidates(self, row, x0, x1, t, dt, cand, heap) -> None:
        r = self.r
        for jt in cand:
            g = int(self._tree_ids[jt])
            if self.awake[g]:
                continue
            c = self.coords[g]
            d0 = float(np.linalg.norm(x0 - c))
            if d0 <= r:
                continue  # entry was recorded when the frog first crossed in
            d1 = float(np.linalg.norm(x1 - c))
            if d1 <= r:
                s = motion._segment_sphere_crossing(x0, x1, c, r)
                s = 1.0 if s is None else s
                heapq.heappush(heap, (float(t + s * dt), int(self.ids[row]), g))
            elif self.policy.bridge_correction:
                p = np.exp(-2.0 * (d0 - r) * (d1 - r) / dt)
                if p > 1e-12 and self.rng.random() < p:
                    s = motion._closest_approach(x0, x1, c)
                    heapq.heappush(heap, (float(t + s * dt), int(self.ids[row]), g))

    def _process_wakes(self, heap, epoch_end: float) -> list[WakeEvent]:
        out: list[WakeEvent] = []
        while heap:
            t_w, frog_id, g = heapq.heappop(heap)
            label = int(self.clustering.labels[g])
            if self.cluster_awake[label]:
                continue
            members = self.clustering.members[label]
            self.cluster_awake[label] = True
            self.awake[members] = True
            self.wake_time[members] = t_w
            # the epoch tree is kept; the awake mask filters woken centers
            out.append(WakeEvent(time=t_w, frog_id=frog_id, cluster_id=label, cluster_size=len(members)))
            start = self.n_active
            count = len(members)
            self.pos[start : start + count] = self.coords[members]
            self.ids[start : start + count] = members
            self.n_active += count
            rows = np.arange(start, start + count)
            if epoch_end - t_w > 1e-15 and not self.frozen_after_wake:
                self._advance_near(rows, t_w, epoch_end, heap)
            else:
                self._bound[rows] = 0.0
        if out:
            self._tree_dirty = True  # rebuild from the shrunken sleeping set next epoch
        return out


def init_sim(
    box_side: float,
    r: float,
    d: int,
    seed: int,
    intensity: float = 1.0,
    policy: StepPolicy | None = None,
    box: tuple[np.ndarray, np.ndarray] | None = None,
    frozen_after_wake: bool = False,
) -> SimState:
    """Sample a fresh configuration and stand up the simulator.

    The configuration is a unit-intensity (unless overridden) Poisson
    process on the box minus the ball B(0, r); clusters are precomputed;
    the origin frog is awake at time 0. ``box`` overrides the centered
    cube when an asymmetric domain is wanted.
    """
    if d not in (1, 2, 3):
        raise ConfigurationError(f"dimension must be 1, 2 or 3, got {d}")
    if r <= 0:
        raise ConfigurationError(f"radius must be positive, got {r}")
    if box is None:
        if box_side <= 4 * r:
            raise ConfigurationError("box_side must exceed 4r")
        half = box_side / 2.0
        lo, hi = -half * np.ones(d), half * np.ones(d)
    else:
        lo, hi = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
    region = Region(lo, hi, excluded_ball=(np.zeros(d), r))
    rng = substream(seed, "sim")
    points = sample_ppp(region, intensity, substream(seed, "ppp"))
    policy = policy or StepPolicy()
    return SimState(points=points, r=r, policy=policy, rng=rng, frozen_after_wake=frozen_after_wake)


def make_sim(
    points: PointSet,
    r: float,
    seed: int,
    policy: StepPolicy | None = None,
    frozen_after_wake: bool = False,
) -> SimState:
    """Simulator over an explicit configuration (tests and oracles)."""
    return SimState(points=points, r=r, policy=policy or StepPolicy(), rng=substream(seed, "sim"),
                    frozen_after_wake=frozen_after_wake)


def advance(sim: SimState, t_end: float, **kwargs) -> list[WakeEvent]:
    return sim.advance(t_end, **kwargs)


def snapshot(sim: SimState) -> tuple[np.ndarray, np.ndarray]:
    """(activated configuration points, positions of all awake frogs)."""
    return sim.coords[sim.activated_indices()], sim.active_positions()


def front_series(
    sim: SimState,
    t_end: float,
    sample_dt: float,
    stop_when_front_exceeds: float | None = None,
) -> FrontSeries:
    """Sample the running right front every sample_dt up to t_end."""
    times, front = [], []
    t = sim.clock
    while t < t_end - 1e-12:
        t = min(t + sample_dt, t_end)
        sim.advance(t, stop_when_front_exceeds=stop_when_front_exceeds)
        times.append(sim.clock)
        front.append(sim.front_max)
        if stop_when_front_exceeds is not None and sim.front_max >= stop_when_front_exceeds:
            break
    return FrontSeries(times=np.array(times), front=np.array(front))


def ray_targets(sim: SimState, v: np.ndarray, n_max: int) -> list[int]:
    """Index of the configuration point nearest to n*v for n = 1..n_max."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    targets = []
    for n in range(1, n_max + 1):
        targets.append(int(np.argmin(np.linalg.norm(sim.coords - n * v, axis=1))))
    return targets


def passage_times_along_ray(
    sim: SimState,
    v: np.ndarray,
    n_max: int,
    t_cap: float,
    check_dt: float = 1.0,
) -> tuple[list[PassageSample], dict]:
    """Passage times T(0, x_n) for the nearest configuration points to n*v.

    Runs the simulation until every target cluster is awake or the time
    cap is reached. The returned flags report boundary exits and partial
    results (targets still asleep at the cap).
    """
    v = np.asarray(v, dtype=float)
    margin = np.min(
        np.minimum(
            sim.points.region.box_hi - n_max * v / np.linalg.norm(v),
            n_max * v / np.linalg.norm(v) - sim.points.region.box_lo,
        )
    )
    flags = {"boundary_exit": False, "partial": False, "margin_warning": bool(margin < 10 * sim.r)}
    targets = ray_targets(sim, v, n_max)
    tgt = np.array(targets)
    while sim.clock < t_cap and not np.all(sim.awake[tgt]):
        sim.advance(min(sim.clock + check_dt, t_cap))
    flags["boundary_exit"] = sim.boundary_exit
    flags["partial"] = bool(not np.all(sim.awake[tgt]))
    samples = []
    for n, idx in enumerate(targets, start=1):
        samples.append(
            PassageSample(
                n=n,
                target_index=idx,
                target=sim.coords[idx],
                passage_time=float(sim.wake_time[idx]),
                awake=bool(sim.awake[idx]),
            )
        )
    return samples, flags
