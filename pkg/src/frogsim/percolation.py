"""Continuum-percolation clusters, sponge crossings and critical-radius estimation.

Clusters are connected components of the graph on point centers with an
edge whenever two centers are within the connection radius of each other.
The prose picture of overlapping radius-r balls corresponds to passing 2r
as the connection radius; the center-distance rule is what this module
implements.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pointprocess import PointSet, Region, SpatialGrid, build_grid, sample_ppp

__all__ = [
    "DisjointSet",
    "ClusterLabeling",
    "CrossingSpec",
    "CrossingEstimate",
    "CriticalRadiusEstimate",
    "clusters",
    "cluster_containing",
    "origin_cluster",
    "sponge_crossing_exists",
    "estimate_crossing_prob",
    "estimate_critical_radius",
    "cluster_size_samples",
    "wilson_interval",
]


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass
class ClusterLabeling:
    """Partition of a point set into connection-radius clusters."""

    labels: np.ndarray
    members: list[np.ndarray]
    connection_radius: float

    @property
    def n_clusters(self) -> int:
        return len(self.members)

    def sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members], dtype=np.int64)


def _neighbor_pairs(coords: np.ndarray, r: float, grid: SpatialGrid):
    """Yield (i_array, j_array) index pairs at distance <= r, each pair once."""
    dim = coords.shape[1]
    offsets = _half_neighborhood(dim)
    for cell, idx in grid.buckets.items():
        # pairs within the cell
        if len(idx) > 1:
            a, b = np.triu_indices(len(idx), k=1)
            ii, jj = idx[a], idx[b]
            d = np.linalg.norm(coords[ii] - coords[jj], axis=1)
            keep = d <= r
            if np.any(keep):
                yield ii[keep], jj[keep]
        for off in offsets:
            other = grid.buckets.get(tuple(c + o for c, o in zip(cell, off)))
            if other is None:
                continue
            diff = coords[idx][:, None, :] - coords[other][None, :, :]
            d = np.linalg.norm(diff, axis=2)
            a, b = np.nonzero(d <= r)
            if a.size:
                yield idx[a], other[b]


def _half_neighborhood(dim: int) -> list[tuple[int, ...]]:
    # lexicographically positive offsets so each cell pair is visited once
    offs = []
    span = (-1, 0, 1)
    for off in np.stack(np.meshgrid(*[span] * dim, indexing="ij"), axis=-1).reshape(-1, dim):
        t = tuple(int(o) for o in off)
        if t > (0,) * dim:
            offs.append(t)
    return offs


def clusters(ps: PointSet | np.ndarray, r: float) -> ClusterLabeling:
    """Connected components of the center-distance graph at radius ``r``.

    Near-linear via a grid with cell size r plus union-find.
    """
    if r <= 0:
        raise ValueError(f"connection radius must be positive, got {r}")
    coords = ps.coords if isinstance(ps, PointSet) else np.asarray(ps, dtype=float)
    n = coords.shape[0]
    if n == 0:
        return ClusterLabeling(labels=np.empty(0, dtype=np.int64), members=[], connection_radius=float(r))
    grid = build_grid(coords, r)
    dsu = DisjointSet(n)
    for ii, jj in _neighbor_pairs(coords, r, grid):
        for a, b in zip(ii, jj):
            dsu.union(int(a), int(b))
    roots = np.fromiter((dsu.find(i) for i in range(n)), dtype=np.int64, count=n)
    uniq, labels = np.unique(roots, return_inverse=True)
    members = [np.nonzero(labels == k)[0] for k in range(len(uniq))]
    return ClusterLabeling(labels=labels, members=members, connection_radius=float(r))


def cluster_containing(cl: ClusterLabeling, x: int) -> np.ndarray:
    """Member indices of the cluster containing point index ``x`` (x included)."""
    if not 0 <= x < len(cl.labels):
        raise IndexError(f"point index {x} out of range for {len(cl.labels)} points")
    return cl.members[int(cl.labels[x])]


def origin_cluster(coords: np.ndarray, origin_index: int, r: float) -> np.ndarray:
    """Indices of the cluster of one point, grown by BFS over the grid.

    Cheaper than a full labeling when only one cluster is needed.
    """
    coords = np.asarray(coords, dtype=float)
    grid = build_grid(coords, r)
    seen = np.zeros(coords.shape[0], dtype=bool)
    seen[origin_index] = True
    frontier = [int(origin_index)]
    out = [int(origin_index)]
    while frontier:
        nxt = []
        for i in frontier:
            for j, _ in grid.query_within(coords[i], r):
                if not seen[j]:
                    seen[j] = True
                    nxt.append(j)
                    out.append(j)
        frontier = nxt
    return np.array(sorted(out), dtype=np.int64)


@dataclass
class CrossingSpec:
    """Left-to-right sponge crossing question for an axis-aligned rectangle."""

    rect_lo: np.ndarray
    rect_hi: np.ndarray
    radius: float

    def __post_init__(self):
        self.rect_lo = np.asarray(self.rect_lo, dtype=float)
        self.rect_hi = np.asarray(self.rect_hi, dtype=float)
        if np.any(self.rect_hi <= self.rect_lo):
            raise ValueError("rectangle must have positive side lengths")
        if self.radius <= 0:
            raise ValueError("radius must be positive")


def sponge_crossing_exists(ps: PointSet | np.ndarray, spec: CrossingSpec) -> tuple[bool, list[int]]:
    """Whether a chain of points joins the left and right sides of the rectangle.

    A chain x_0..x_k qualifies when x_0 is within ``radius`` of the left
    side, x_k within ``radius`` of the right side, and consecutive points
    are within ``radius`` of each other. Returns the witness chain (point
    indices, left to right) when one exists.
    """
    coords = ps.coords if isinstance(ps, PointSet) else np.asarray(ps, dtype=float)
    r = spec.radius
    n = coords.shape[0]
    if n == 0:
        return False, []
    x0, x1 = spec.rect_lo[0], spec.rect_hi[0]
    near_left = np.nonzero(coords[:, 0] - x0 <= r)[0]
    near_right = set(np.nonzero(x1 - coords[:, 0] <= r)[0].tolist())
    if near_left.size == 0 or not near_right:
        return False, []
    grid = build_grid(coords, r)
    parent = np.full(n, -2, dtype=np.int64)  # -2 unvisited, -1 source
    frontier = list(int(i) for i in near_left)
    for i in frontier:
        parent[i] = -1
    while frontier:
        nxt = []
        for i in frontier:
            if i in near_right:
                chain = []
                j = i
                while j != -1:
                    chain.append(int(j))
                    j = int(parent[j])
                chain.reverse()
                _assert_chain_valid(coords, chain, spec)
                return True, chain
            for j, _ in grid.query_within(coords[i], r):
                if parent[j] == -2 and j != i:
                    parent[j] = i
                    nxt.append(j)
        frontier = nxt
    return False, []


def _assert_chain_valid(coords: np.ndarray, chain: list[int], spec: CrossingSpec) -> None:
    r = spec.radius
    assert coords[chain[0], 0] - spec.rect_lo[0] <= r + 1e-12
    assert spec.rect_hi[0] - coords[chain[-1], 0] <= r + 1e-12
    for a, b in zip(chain, chain[1:]):
        assert np.linalg.norm(coords[a] - coords[b]) <= r + 1e-12


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * np.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class CrossingEstimate:
    p_hat: float
    ci: tuple[float, float]
    successes: int
    replicas: int
    mode: str


def estimate_crossing_prob(
    r: float,
    n: float,
    aspect: float,
    mode: str,
    replicas: int,
    rng: np.random.Generator,
    intensity: float = 1.0,
) -> CrossingEstimate:
    """Monte Carlo crossing probability of an n-by-(aspect*n) rectangle.

    mode "any": fraction of point configurations with a left-right sponge
    crossing. mode "leftmost_from_ball": one extra point is placed
    uniformly in the left strip of width r, and a trial succeeds when that
    point is the leftmost member of its cluster and the cluster reaches
    horizontal displacement n - r from it.
    """
    if n <= r:
        raise ValueError(f"rectangle width n={n} must exceed the radius r={r}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if mode not in ("any", "leftmost_from_ball"):
        raise ValueError(f"unknown mode {mode!r}")
    lo = np.array([0.0, 0.0])
    hi = np.array([float(n), float(aspect * n)])
    region = Region(lo, hi)
    spec = CrossingSpec(lo, hi, r)
    successes = 0
    for _ in range(replicas):
        ps = sample_ppp(region, intensity, rng)
        if mode == "any":
            ok, _ = sponge_crossing_exists(ps, spec)
        else:
            probe = rng.uniform(low=[0.0, 0.0], high=[r, hi[1]], size=(1, 2))
            coords = np.vstack([probe, ps.coords]) if len(ps) else probe
            member = origin_cluster(coords, 0, r)
            xs = coords[member, 0]
            ok = bool(np.argmin(xs) == 0 and xs.max() - coords[0, 0] >= n - r)
        successes += bool(ok)
    return CrossingEstimate(
        p_hat=successes / replicas,
        ci=wilson_interval(successes, replicas),
        successes=successes,
        replicas=replicas,
        mode=mode,
    )


@dataclass
class CriticalRadiusEstimate:
    r_hat: float
    tol: float
    n: float
    trace: list[tuple[float, float, float, float]] = field(default_factory=list)
    # trace rows: (r_lo, r_hi, r_mid, p_hat at r_mid)


def estimate_critical_radius(
    n: float,
    replicas: int,
    tol: float,
    rng: np.random.Generator,
    d: int = 2,
    bracket: tuple[float, float] = (0.6, 2.0),
    max_iter: int = 40,
) -> CriticalRadiusEstimate:
    """Bisect the connection radius until the n-by-n crossing probability crosses 1/2."""
    if d != 2:
        raise ValueError("critical-radius estimation is implemented for d=2 only")
    r_lo, r_hi = bracket
    est_lo = estimate_crossing_prob(r_lo, n, 1.0, "any", replicas, rng)
    est_hi = estimate_crossing_prob(r_hi, n, 1.0, "any", replicas, rng)
    trace: list[tuple[float, float, float, float]] = []
    if not (est_lo.p_hat < 0.5 < est_hi.p_hat):
        raise RuntimeError(
            f"bracket {bracket} does not straddle p=1/2: p({r_lo})={est_lo.p_hat}, p({r_hi})={est_hi.p_hat}"
        )
    it = 0
    while r_hi - r_lo > tol:
        it += 1
        if it > max_iter:
            raise RuntimeError(f"critical-radius bisection did not converge; trace={trace}")
        r_mid = 0.5 * (r_lo + r_hi)
        est = estimate_crossing_prob(r_mid, n, 1.0, "any", replicas, rng)
        trace.append((r_lo, r_hi, r_mid, est.p_hat))
        if est.p_hat < 0.5:
            r_lo = r_mid
        else:
            r_hi = r_mid
    return CriticalRadiusEstimate(r_hat=0.5 * (r_lo + r_hi), tol=tol, n=n, trace=trace)


def cluster_size_samples(
    r: float,
    box_side: float,
    replicas: int,
    rng: np.random.Generator,
    dim: int = 2,
) -> tuple[np.ndarray, int]:
    """I.i.d. samples of the size of the cluster of a point added at the origin.

    Each replica adds the origin to a fresh unit Poisson configuration on
    a centered box and counts the origin's cluster. Clusters touching the
    box boundary are discarded; the second return value counts them.
    """
    if box_side <= 4 * r:
        raise ValueError("box_side must be well above the connection radius")
    half = box_side / 2.0
    region = Region(-half * np.ones(dim), half * np.ones(dim))
    sizes = []
    truncated = 0
    while len(sizes) < replicas:
        ps = sample_ppp(region, 1.0, rng)
        coords = np.vstack([np.zeros((1, dim)), ps.coords]) if len(ps) else np.zeros((1, dim))
        member = origin_cluster(coords, 0, r)
        if np.any(np.abs(coords[member]) > half - r):
            truncated += 1
            continue
        sizes.append(len(member))
    return np.array(sizes, dtype=np.int64), truncated
