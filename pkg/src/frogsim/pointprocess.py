"""Poisson point processes on boxes (minus an optional ball) and a uniform-grid spatial index."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigurationError",
    "Region",
    "PointSet",
    "SpatialGrid",
    "sample_ppp",
    "build_grid",
    "ball_volume",
]


class ConfigurationError(ValueError):
    """Raised for degenerate regions, non-finite intensities and similar misuse."""


def ball_volume(radius: float, dim: int) -> float:
    """Lebesgue volume of a ``dim``-dimensional ball."""
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * radius**dim


@dataclass
class Region:
    """Axis-aligned box, optionally minus a closed ball.

    The excluded ball, when present, must lie entirely inside the box or
    entirely outside it; a ball straddling the boundary would make the
    region volume intractable to state exactly.
    """

    box_lo: np.ndarray
    box_hi: np.ndarray
    excluded_ball: tuple[np.ndarray, float] | None = None

    def __post_init__(self):
        self.box_lo = np.atleast_1d(np.asarray(self.box_lo, dtype=float))
        self.box_hi = np.atleast_1d(np.asarray(self.box_hi, dtype=float))
        if self.box_lo.shape != self.box_hi.shape or self.box_lo.ndim != 1:
            raise ConfigurationError("box_lo and box_hi must be 1-d and of equal length")
        d = self.box_lo.size
        if not 1 <= d <= 3:
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {d}")
        if not (np.all(np.isfinite(self.box_lo)) and np.all(np.isfinite(self.box_hi))):
            raise ConfigurationError("box bounds must be finite")
        if not np.all(self.box_lo < self.box_hi):
            raise ConfigurationError("box_lo must be componentwise below box_hi")
        if self.excluded_ball is not None:
            center, radius = self.excluded_ball
            center = np.atleast_1d(np.asarray(center, dtype=float))
            if center.shape != self.box_lo.shape:
                raise ConfigurationError("excluded ball center has wrong dimension")
            if not (np.all(np.isfinite(center)) and np.isfinite(radius)) or radius < 0:
                raise ConfigurationError("excluded ball must have finite center and radius >= 0")
            self.excluded_ball = (center, float(radius))
            inside = np.all(center - radius >= self.box_lo) and np.all(center + radius <= self.box_hi)
            outside = self._ball_misses_box(center, radius)
            if not (inside or outside):
                raise ConfigurationError("excluded ball must lie fully inside or fully outside the box")
        if self.volume() <= 0:
            raise ConfigurationError("region volume must be positive")

    def _ball_misses_box(self, center: np.ndarray, radius: float) -> bool:
        nearest = np.clip(center, self.box_lo, self.box_hi)
        return float(np.linalg.norm(center - nearest)) > radius

    @property
    def dim(self) -> int:
        return self.box_lo.size

    def box_volume(self) -> float:
        return float(np.prod(self.box_hi - self.box_lo))

    def volume(self) -> float:
        vol = self.box_volume()
        if self.excluded_ball is not None:
            center, radius = self.excluded_ball
            if not self._ball_misses_box(center, radius):
                vol -= ball_volume(radius, self.dim)
        return vol

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of which rows of ``points`` lie in the region."""
        pts = np.atleast_2d(points)
        ok = np.all((pts >= self.box_lo) & (pts <= self.box_hi), axis=1)
        if self.excluded_ball is not None:
            center, radius = self.excluded_ball
            ok &= np.linalg.norm(pts - center, axis=1) > radius
        return ok

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` i.i.d. uniform points on the region (rejection against the ball)."""
        out = np.empty((n, self.dim))
        filled = 0
        while filled < n:
            need = n - filled
            cand = rng.uniform(self.box_lo, self.box_hi, size=(need, self.dim))
            if self.excluded_ball is not None:
                center, radius = self.excluded_ball
                cand = cand[np.linalg.norm(cand - center, axis=1) > radius]
            out[filled : filled + cand.shape[0]] = cand
            filled += cand.shape[0]
        return out


@dataclass
class PointSet:
    """A sampled point configuration together with its region descriptor."""

    coords: np.ndarray
    region: Region
    intensity: float = 1.0

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.size == 0:
            self.coords = self.coords.reshape(0, self.region.dim)
        if self.coords.ndim != 2 or self.coords.shape[1] != self.region.dim:
            raise ConfigurationError("coords must have shape (n, region.dim)")

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.region.dim

    def validate(self) -> None:
        """Assert every point lies in the region."""
        if len(self) and not np.all(self.region.contains(self.coords)):
            raise AssertionError("point outside its declared region")


def sample_ppp(region: Region, intensity: float, rng: np.random.Generator) -> PointSet:
    """Sample a homogeneous Poisson point process on ``region``.

    Count is Poisson(intensity * region.volume()); locations are i.i.d.
    uniform on the region. Deterministic given the generator state.
    """
    if not np.isfinite(intensity) or intensity < 0:
        raise ConfigurationError(f"intensity must be finite and >= 0, got {intensity}")
    n = int(rng.poisson(intensity * region.volume()))
    coords = region.sample_uniform(n, rng)
    return PointSet(coords=coords, region=region, intensity=float(intensity))


class SpatialGrid:
    """Uniform-grid index over a fixed set of points for radius queries.

    Buckets map an integer cell index tuple to the indices of the points
    in that cell. With cell_size equal to the query radius, a radius
    query touches at most 3**d cells.
    """

    def __init__(self, coords: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ConfigurationError(f"cell_size must be positive, got {cell_size}")
        self.coords = np.asarray(coords, dtype=float)
        if self.coords.ndim != 2:
            self.coords = self.coords.reshape(-1, 1) if self.coords.size else self.coords.reshape(0, 1)
        self.cell_size = float(cell_size)
        self.buckets: dict[tuple[int, ...], np.ndarray] = {}
        if len(self.coords):
            cells = np.floor(self.coords / self.cell_size).astype(np.int64)
            order = np.lexsort(cells.T[::-1])
            cells_sorted = cells[order]
            boundaries = np.nonzero(np.any(np.diff(cells_sorted, axis=0) != 0, axis=1))[0] + 1
            for chunk in np.split(order, boundaries):
                self.buckets[tuple(int(c) for c in cells[chunk[0]])] = chunk

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def _cells_overlapping(self, x: np.ndarray, rho: float):
        lo = np.floor((x - rho) / self.cell_size).astype(np.int64)
        hi = np.floor((x + rho) / self.cell_size).astype(np.int64)
        ranges = [range(int(a), int(b) + 1) for a, b in zip(lo, hi)]
        if self.dim == 1:
            return ((i,) for i in ranges[0])
        if self.dim == 2:
            return ((i, j) for i in ranges[0] for j in ranges[1])
        return ((i, j, k) for i in ranges[0] for j in ranges[1] for k in ranges[2])

    def candidates(self, x: np.ndarray, rho: float) -> np.ndarray:
        """Indices of points in every cell intersecting the ball B(x, rho)."""
        found = [self.buckets[c] for c in self._cells_overlapping(np.asarray(x, dtype=float), rho) if c in self.buckets]
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(found)

    def query_within(self, x, rho: float) -> list[tuple[int, float]]:
        """All (index, distance) pairs with distance <= rho, sorted ascending.

        Ties are broken by index so results are deterministic.
        """
        if rho < 0:
            raise ValueError("query radius must be >= 0")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        cand = self.candidates(x, rho)
        if cand.size == 0:
            return []
        dists = np.linalg.norm(self.coords[cand] - x, axis=1)
        keep = dists <= rho
        cand, dists = cand[keep], dists[keep]
        order = np.lexsort((cand, dists))
        return [(int(i), float(d)) for i, d in zip(cand[order], dists[order])]

    def nearest(self, x, upper_bound: float) -> tuple[int, float] | None:
        """Nearest stored point within ``upper_bound`` of ``x``, or None.

        Searches expanding cell shells; exact because a shell at Chebyshev
        distance k only contains points beyond (k-1)*cell_size.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not len(self):
            return None
        base = np.floor(x / self.cell_size).astype(np.int64)
        best_i, best_d = -1, np.inf
        max_shell = int(np.ceil(upper_bound / self.cell_size)) + 1
        for k in range(max_shell + 1):
            if best_d <= max((k - 1), 0) * self.cell_size:
                break
            for cell in self._shell_cells(base, k):
                idx = self.buckets.get(cell)
                if idx is None:
                    continue
                d = np.linalg.norm(self.coords[idx] - x, axis=1)
                j = int(np.argmin(d))
                if d[j] < best_d or (d[j] == best_d and idx[j] < best_i):
                    best_i, best_d = int(idx[j]), float(d[j])
        if best_d <= upper_bound:
            return best_i, best_d
        return None

    def _shell_cells(self, base: np.ndarray, k: int):
        d = self.dim
        if k == 0:
            yield tuple(base)
            return
        rng_full = range(-k, k + 1)
        if d == 1:
            yield (int(base[0] - k),)
            yield (int(base[0] + k),)
        elif d == 2:
            for i in rng_full:
                for j in rng_full:
                    if max(abs(i), abs(j)) == k:
                        yield (int(base[0] + i), int(base[1] + j))
        else:
            for i in rng_full:
                for j in rng_full:
                    for l in rng_full:
                        if max(abs(i), abs(j), abs(l)) == k:
                            yield (int(base[0] + i), int(base[1] + j), int(base[2] + l))


def build_grid(ps: PointSet | np.ndarray, cell_size: float) -> SpatialGrid:
    """Index every point of ``ps`` on a uniform grid of the given cell size."""
    coords = ps.coords if isinstance(ps, PointSet) else np.asarray(ps, dtype=float)
    return SpatialGrid(coords, cell_size)
