"""Brownian frog model simulator and statistical-estimation toolkit."""

from .motion import HitResult, StepPolicy, adaptive_dt, bridge_hit_prob, simulate_until_hit
from .percolation import (
    ClusterLabeling,
    CrossingSpec,
    cluster_containing,
    clusters,
    estimate_critical_radius,
    estimate_crossing_prob,
    sponge_crossing_exists,
)
from .pointprocess import PointSet, Region, SpatialGrid, build_grid, sample_ppp
from .model import SimState, advance, front_series, init_sim, make_sim, passage_times_along_ray, snapshot
from .rng import substream

__version__ = "0.1.0"

__all__ = [
    "HitResult",
    "StepPolicy",
    "adaptive_dt",
    "bridge_hit_prob",
    "simulate_until_hit",
    "ClusterLabeling",
    "CrossingSpec",
    "cluster_containing",
    "clusters",
    "estimate_critical_radius",
    "estimate_crossing_prob",
    "sponge_crossing_exists",
    "PointSet",
    "Region",
    "SpatialGrid",
    "build_grid",
    "sample_ppp",
    "SimState",
    "advance",
    "front_series",
    "init_sim",
    "make_sim",
    "passage_times_along_ray",
    "snapshot",
    "substream",
    "__version__",
]
