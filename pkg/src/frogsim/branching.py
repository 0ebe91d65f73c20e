"""Dominating branching process with independent per-lineage environments.

Each particle waits a fresh first-entry time (a Brownian particle against
a fresh Poisson configuration minus its own ball), then branches into
X = K + 2 offspring: the contact position, the contacted center, and the
K further members of the contacted center's percolation cluster in a
fresh configuration. Sibling environment sharing is deliberately dropped:
all laws verified here depend only on per-lineage marginals, which are
unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motion import StepPolicy, simulate_until_hit
from .percolation import origin_cluster
from .pointprocess import Region, sample_ppp
from .rng import substream

__all__ = [
    "OffspringSample",
    "BranchingRecord",
    "sample_offspring",
    "sample_interbranch",
    "simulate_branching",
    "generation_stats",
]


@dataclass(frozen=True)
class OffspringSample:
    """One draw of the branching offspring law."""

    k_extra: int  # cluster members beyond the contacted center
    positions: np.ndarray  # offspring offsets from the contacted center, contact point last
    truncated: bool

    @property
    def x(self) -> int:
        return self.k_extra + 2

    @property
    def max_displacement(self) -> float:
        return float(np.linalg.norm(self.positions, axis=1).max())


def sample_offspring(r: float, box_side: float, rng: np.random.Generator, dim: int = 2) -> OffspringSample:
    """Sample the offspring cloud around a contacted center.

    A point is added at the origin of a fresh unit Poisson configuration;
    K is its cluster size minus one. Offspring offsets are the cluster
    member coordinates plus a contact point at distance r. Clusters
    touching the box boundary are flagged as truncated.
    """
    half = box_side / 2.0
    region = Region(-half * np.ones(dim), half * np.ones(dim))
    ps = sample_ppp(region, 1.0, rng)
    coords = np.vstack([np.zeros((1, dim)), ps.coords]) if len(ps) else np.zeros((1, dim))
    members = origin_cluster(coords, 0, r)
    truncated = bool(np.any(np.abs(coords[members]) > half - r))
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    contact = (r * direction).reshape(1, dim)
    positions = np.vstack([coords[members], contact])
    return OffspringSample(k_extra=len(members) - 1, positions=positions, truncated=truncated)


@dataclass(frozen=True)
class InterbranchSample:
    tau: float
    contact_offset: np.ndarray  # contacted center relative to the particle's start
    hit_position: np.ndarray
    timed_out: bool


def sample_interbranch(
    r: float,
    rng: np.random.Generator,
    dim: int = 2,
    env_half_side: float = 12.0,
    t_cap: float = 60.0,
    policy: StepPolicy | None = None,
) -> InterbranchSample:
    """One inter-branch time: first entry of a Brownian particle into a fresh
    configuration minus its own ball.

    The environment is a unit Poisson process on a centered box minus
    B(0, r). Timeouts at t_cap are flagged (exponential-tail events at
    any sane cap).
    """
    region = Region(-env_half_side * np.ones(dim), env_half_side * np.ones(dim), excluded_ball=(np.zeros(dim), r))
    env = sample_ppp(region, 1.0, rng)
    policy = policy or StepPolicy()
    res = simulate_until_hit(np.zeros(dim), env.coords, r, t_cap, policy, rng)
    if res.hit:
        return InterbranchSample(
            tau=res.time,
            contact_offset=env.coords[res.center_index],
            hit_position=res.position,
            timed_out=False,
        )
    return InterbranchSample(tau=t_cap, contact_offset=np.zeros(dim), hit_position=res.position, timed_out=True)


@dataclass
class BranchingRecord:
    """Genealogy arranged as flat arrays indexed by particle id (root = 0)."""

    parent: np.ndarray
    generation: np.ndarray
    birth_time: np.ndarray
    birth_pos: np.ndarray
    interbranch: np.ndarray  # tau drawn by each particle (nan if never branched)
    truncated: bool
    flags: dict = field(default_factory=dict)

    @property
    def n_particles(self) -> int:
        return len(self.parent)

    def generation_sizes(self, n_max: int | None = None) -> np.ndarray:
        gmax = int(self.generation.max()) if self.n_particles else 0
        n_max = gmax if n_max is None else n_max
        sizes = np.zeros(n_max + 1, dtype=np.int64)
        for g in range(min(gmax, n_max) + 1):
            sizes[g] = int(np.sum(self.generation == g))
        return sizes

    def lineage_taus(self, particle: int) -> np.ndarray:
        """Inter-branch times along the ancestry of one particle."""
        taus = []
        i = int(particle)
        while self.parent[i] >= 0:
            p = int(self.parent[i])
            taus.append(self.birth_time[i] - self.birth_time[p])
            i = p
        return np.array(taus[::-1])


def simulate_branching(
    r: float,
    seed: int,
    dim: int = 2,
    t_max: float | None = None,
    gen_max: int | None = None,
    population_cap: int = 50_000,
    offspring_box_side: float | None = None,
    env_half_side: float = 12.0,
    t_cap: float = 60.0,
    policy: StepPolicy | None = None,
) -> BranchingRecord:
    """Simulate the branching process to a time or generation horizon.

    Every particle draws its own environment from a substream keyed by
    its id, so records are reproducible regardless of traversal order.
    """
    if t_max is None and gen_max is None:
        raise ValueError("one of t_max or gen_max is required")
    box_side = offspring_box_side or max(40.0 * r, 8.0)
    parent, gen, btime, bpos, taus = [-1], [0], [0.0], [np.zeros(dim)], [np.nan]
    truncated_cluster = 0
    timed_out = 0
    # queue of particles that still get to branch
    queue = [0]
    cap_hit = False
    while queue:
        i = queue.pop()
        if gen_max is not None and gen[i] >= gen_max:
            continue
        prng = substream(seed, "particle", i)
        # no branch can land past the horizon, so cap the wait simulation
        # at the particle's remaining time (a timeout there means "no
        # branch", which is all the record needs)
        cap_i = t_cap if t_max is None else min(t_cap, t_max - btime[i] + 1e-9)
        inter = sample_interbranch(r, prng, dim=dim, env_half_side=env_half_side, t_cap=cap_i, policy=policy)
        if inter.timed_out:
            if cap_i >= t_cap:
                timed_out += 1
            continue
        t_branch = btime[i] + inter.tau
        if t_max is not None and t_branch > t_max:
            continue
        taus[i] = inter.tau
        off = sample_offspring(r, box_side, prng, dim=dim)
        if off.truncated:
            truncated_cluster += 1
        anchor = bpos[i] + inter.contact_offset
        # cluster members land around the contacted center; the parent's own
        # contact position replaces the sample's synthetic contact point
        child_positions = [anchor + pos for pos in off.positions[:-1]]
        child_positions.append(bpos[i] + inter.hit_position)
        for pos in child_positions:
            parent.append(i)
            gen.append(gen[i] + 1)
            btime.append(t_branch)
            bpos.append(pos)
            taus.append(np.nan)
            queue.append(len(parent) - 1)
        if len(parent) > population_cap:
            cap_hit = True
            break
    return BranchingRecord(
        parent=np.array(parent, dtype=np.int64),
        generation=np.array(gen, dtype=np.int64),
        birth_time=np.array(btime),
        birth_pos=np.array(bpos),
        interbranch=np.array(taus),
        truncated=cap_hit,
        flags={"truncated_clusters": truncated_cluster, "tau_timeouts": timed_out},
    )


def generation_stats(records: list[BranchingRecord], t: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-record max generation number and max birth displacement at time t."""
    n_t, m_t = [], []
    for rec in records:
        born = rec.birth_time <= t
        n_t.append(int(rec.generation[born].max()) if born.any() else 0)
        m_t.append(float(np.linalg.norm(rec.birth_pos[born], axis=1).max()) if born.any() else 0.0)
    return np.array(n_t), np.array(m_t)
