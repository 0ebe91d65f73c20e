"""Estimators turning raw simulation output into the model's headline quantities.

Every verdict carries its sample size and an uncertainty estimate; no
pass/fail is reported bare. The default significance threshold is 0.01
with Bonferroni correction across simultaneous window tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

__all__ = [
    "SpeedEstimate",
    "ExponentFit",
    "WindowTestReport",
    "BoundCheck",
    "estimate_speed",
    "poisson_window_test",
    "growth_exponent_fit",
    "tail_exponent_fit",
    "verify_bm_bounds",
    "chi_square_poisson_gof",
    "dispersion_index",
    "least_squares_line",
]

P_THRESHOLD = 0.01


def least_squares_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and r^2 of an ordinary least-squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points to fit a line")
    a, b = np.polyfit(x, y, 1)
    pred = a * x + b
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(a), float(b), r2


@dataclass
class SpeedEstimate:
    """Time constant (time per unit distance) along a ray, with speed = 1/constant."""

    gamma_tilde: float
    gamma: float
    ci: tuple[float, float]
    r: float
    n_replicas: int
    per_replica: np.ndarray
    flags: dict = field(default_factory=dict)


def estimate_speed(samples_per_replica: list[list], r: float) -> SpeedEstimate:
    """Least-squares slope of passage time versus distance, over the far half.

    ``samples_per_replica`` holds PassageSample lists, one per replica.
    The slope is fit per replica on the largest-n half of the awake
    targets; the CI comes from the replicate spread.
    """
    if len(samples_per_replica) < 5:
        raise ValueError("need at least 5 replicas for a speed estimate")
    slopes = []
    any_partial = False
    for samples in samples_per_replica:
        awake = [s for s in samples if s.awake]
        if len(awake) < len(samples):
            any_partial = True
        if len(awake) < 4:
            continue
        ns = np.array([s.n for s in awake], dtype=float)
        if ns.max() < 2 * ns.min():
            raise ValueError("n range must span at least a factor of 2")
        ts = np.array([s.passage_time for s in awake])
        half = ns >= np.median(ns)
        slope, _, _ = least_squares_line(ns[half], ts[half])
        slopes.append(slope)
    slopes = np.array(slopes)
    if slopes.size < 5:
        raise ValueError("fewer than 5 replicas produced usable passage data")
    mean = float(slopes.mean())
    se = float(slopes.std(ddof=1) / math.sqrt(slopes.size))
    ci = (mean - 1.96 * se, mean + 1.96 * se)
    gamma = float("inf") if mean <= 0 else 1.0 / mean
    return SpeedEstimate(
        gamma_tilde=mean,
        gamma=gamma,
        ci=ci,
        r=r,
        n_replicas=int(slopes.size),
        per_replica=slopes,
        flags={"partial": any_partial},
    )


def chi_square_poisson_gof(counts: np.ndarray, mean: float, min_expected: float = 5.0) -> tuple[float, float, int]:
    """Chi-square goodness of fit of integer counts against Poisson(mean).

    Bins with expected mass below ``min_expected`` merge into their
    neighbors. Returns (statistic, p-value, degrees of freedom).
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.size
    kmax = int(counts.max()) if n else 0
    support = np.arange(kmax + 1)
    probs = sps.poisson.pmf(support, mean)
    probs = np.append(probs, max(1.0 - probs.sum(), 0.0))  # tail bin
    observed = np.bincount(counts, minlength=kmax + 2).astype(float)
    expected = probs * n
    # merge from the right until every bin has enough mass
    obs_bins, exp_bins = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if obs_bins:
        obs_bins[-1] += acc_o
        exp_bins[-1] += acc_e
    else:
        obs_bins, exp_bins = [acc_o], [acc_e]
    obs_arr = np.array(obs_bins)
    exp_arr = np.array(exp_bins)
    exp_arr *= obs_arr.sum() / exp_arr.sum()
    dof = max(len(obs_bins) - 1, 1)
    stat = float(np.sum((obs_arr - exp_arr) ** 2 / exp_arr))
    p = float(sps.chi2.sf(stat, dof))
    return stat, p, dof


def dispersion_index(counts: np.ndarray) -> tuple[float, tuple[float, float]]:
    """Variance-to-mean ratio with a normal-approximation 95% CI."""
    counts = np.asarray(counts, dtype=float)
    m = counts.mean()
    if m == 0:
        return float("nan"), (float("nan"), float("nan"))
    d = counts.var(ddof=1) / m
    half = 1.96 * math.sqrt(2.0 / (counts.size - 1))
    return float(d), (float(d - half), float(d + half))


@dataclass
class WindowTestReport:
    window_means: list[float]
    window_volumes: list[float]
    dispersion: list[float]
    dispersion_ci: list[tuple[float, float]]
    gof_p: list[float]
    max_abs_correlation: float
    excluded_replicas: int
    used_replicas: int
    passed: bool
    details: dict = field(default_factory=dict)


def poisson_window_test(
    counts_per_window: np.ndarray,
    window_volumes: np.ndarray,
    excluded: int = 0,
    mean_rtol: float = 0.10,
    dispersion_band: tuple[float, float] = (0.8, 1.2),
    corr_limit: float = 0.05,
) -> WindowTestReport:
    """Test window counts across replicas against independent Poisson(volume) laws.

    ``counts_per_window`` has shape (replicas, windows). Applies a mean
    check, a dispersion-index band, a chi-square GOF per window
    (Bonferroni-corrected threshold), and a cross-window correlation
    limit.
    """
    counts = np.asarray(counts_per_window, dtype=np.int64)
    vols = np.asarray(window_volumes, dtype=float)
    n_rep, n_win = counts.shape
    if vols.size != n_win:
        raise ValueError("one volume per window required")
    means, disps, cis, gofs = [], [], [], []
    for w in range(n_win):
        col = counts[:, w]
        means.append(float(col.mean()))
        d, ci = dispersion_index(col)
        disps.append(d)
        cis.append(ci)
        _, p, _ = chi_square_poisson_gof(col, vols[w])
        gofs.append(p)
    max_corr = 0.0
    for a in range(n_win):
        for b in range(a + 1, n_win):
            c = np.corrcoef(counts[:, a], counts[:, b])[0, 1]
            if np.isfinite(c):
                max_corr = max(max_corr, abs(float(c)))
    bonferroni = P_THRESHOLD / n_win
    ok_mean = all(abs(m - v) <= mean_rtol * v for m, v in zip(means, vols))
    ok_disp = all(dispersion_band[0] <= d <= dispersion_band[1] for d in disps)
    ok_gof = all(p > bonferroni for p in gofs)
    ok_corr = max_corr < corr_limit
    return WindowTestReport(
        window_means=means,
        window_volumes=[float(v) for v in vols],
        dispersion=disps,
        dispersion_ci=cis,
        gof_p=gofs,
        max_abs_correlation=max_corr,
        excluded_replicas=excluded,
        used_replicas=n_rep,
        passed=bool(ok_mean and ok_disp and ok_gof and ok_corr),
        details={"ok_mean": ok_mean, "ok_dispersion": ok_disp, "ok_gof": ok_gof, "ok_corr": ok_corr,
                 "gof_threshold": bonferroni},
    )


@dataclass
class ExponentFit:
    alpha: float
    r2: float
    window: tuple[float, float]
    n_points: int


def growth_exponent_fit(
    times: np.ndarray,
    values: np.ndarray,
    window_decades: float = 0.5,
    log_spacing: bool = False,
    n_resample: int = 60,
) -> ExponentFit:
    """Log-log slope of a growth curve over its trailing time window.

    The fit window is the trailing ``window_decades`` decades of t.
    Raises when any value in the window is nonpositive. With
    ``log_spacing`` the series is resampled (previous-sample hold, exact
    for running-max curves) on a log-uniform time grid first, so every
    decade carries equal weight; uniform-in-t sampling would otherwise
    let long stalls swamp the slope of jump-driven growth.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 3:
        raise ValueError("need at least three samples")
    t_hi = t.max()
    t_lo = t_hi / 10**window_decades
    mask = (t >= t_lo) & (t > 0)
    if mask.sum() < 3:
        raise ValueError("fit window holds fewer than three samples")
    if np.any(v[mask] <= 0):
        raise ValueError("growth values must be positive inside the fit window")
    tm, vm = t[mask], v[mask]
    if log_spacing:
        grid = np.geomspace(tm.min(), tm.max(), n_resample)
        idx = np.searchsorted(tm, grid, side="right") - 1
        tm, vm = grid, vm[np.clip(idx, 0, len(vm) - 1)]
    alpha, _, r2 = least_squares_line(np.log(tm), np.log(vm))
    return ExponentFit(alpha=alpha, r2=r2, window=(float(t_lo), float(t_hi)), n_points=int(mask.sum()))


def time_to_distance_exponent(
    times_list: list[np.ndarray],
    fronts_list: list[np.ndarray],
    r_lo: float,
    r_hi: float,
    n_grid: int = 12,
) -> ExponentFit:
    """Growth exponent from the replica-median time-to-distance curve.

    For each distance R on a log grid in [r_lo, r_hi], T(R) is the first
    sample time the front reaches R; the median over replicas is fit as
    log T versus log R and the exponent reported is the reciprocal slope.
    Jump-dominated growth (stalls followed by large cluster wakes) makes
    per-replica log R_t fits bimodal; the pooled inverse curve is stable.
    """
    grid = np.geomspace(r_lo, r_hi, n_grid)
    med = []
    for R in grid:
        t_hit = []
        for t, f in zip(times_list, fronts_list):
            idx = np.nonzero(np.asarray(f) >= R)[0]
            t_hit.append(float(np.asarray(t)[idx[0]]) if idx.size else np.inf)
        med.append(float(np.median(t_hit)))
    med = np.array(med)
    if not np.all(np.isfinite(med)) or np.any(med <= 0):
        raise ValueError("median front never reached part of the distance grid")
    slope, _, r2 = least_squares_line(np.log(grid), np.log(med))
    if slope <= 0:
        raise ValueError("median time-to-distance curve is not increasing")
    return ExponentFit(alpha=1.0 / slope, r2=r2, window=(float(r_lo), float(r_hi)), n_points=n_grid)


def tail_exponent_fit(samples: np.ndarray, k_min: float | None = None) -> tuple[float, float]:
    """Exponential decay rate of the empirical survival function.

    Least squares on log P[X > k] versus k for k at or beyond the median
    (or ``k_min``). Returns (rate, r^2); the rate is positive for a
    decaying tail.
    """
    x = np.asarray(samples)
    if x.size < 100:
        raise ValueError("need a sizable sample for a tail fit")
    if np.all(x == x[0]):
        raise ValueError("degenerate sample: all values equal")
    start = float(np.median(x)) if k_min is None else float(k_min)
    ks = np.arange(max(int(start), int(x.min())), int(x.max()))
    surv = np.array([(x > k).mean() for k in ks])
    keep = surv > 0
    ks, surv = ks[keep], surv[keep]
    if ks.size < 3:
        raise ValueError("tail support too small for a fit")
    slope, _, r2 = least_squares_line(ks.astype(float), np.log(surv))
    return -slope, r2


@dataclass
class BoundCheck:
    name: str
    ell: int
    empirical: float
    bound: float
    sigma: float
    passed: bool
    replicas: int


def verify_bm_bounds(
    ells: list[int],
    replicas: int,
    rng: np.random.Generator,
    steps_per_unit: int = 1000,
    chunk: int = 20000,
) -> list[BoundCheck]:
    """Check the confinement and upper-deviation bounds for 1-d Brownian motion.

    For each integer ell: P[max_{t<=ell} |B_t| <= 1] against 0.7^ell and
    P[max_{t<=1} B_t >= ell] against 2 exp(-ell^2/2) (k = 1 by Brownian
    scaling). Step extremes use exact Brownian-bridge max/min sampling so
    discretization does not understate the running extremes. A check
    passes when the empirical value is at most bound + 3 sigma.
    """
    out: list[BoundCheck] = []
    for ell in ells:
        stay = _confinement_probability(ell, replicas, rng, steps_per_unit, chunk)
        sigma = math.sqrt(max(stay * (1 - stay), 1e-12) / replicas)
        out.append(
            BoundCheck(
                name="confinement",
                ell=ell,
                empirical=stay,
                bound=0.7**ell,
                sigma=sigma,
                passed=stay <= 0.7**ell + 3 * sigma,
                replicas=replicas,
            )
        )
    for ell in ells:
        up = _upper_deviation_probability(ell, replicas, rng, steps_per_unit, chunk)
        bound = 2.0 * math.exp(-(ell**2) / 2.0)
        sigma = math.sqrt(max(up * (1 - up), 1e-12) / replicas)
        out.append(
            BoundCheck(
                name="upper_deviation",
                ell=ell,
                empirical=up,
                bound=bound,
                sigma=sigma,
                passed=up <= bound + 3 * sigma,
                replicas=replicas,
            )
        )
    return out


def _bridge_extremes(x0: np.ndarray, x1: np.ndarray, dt: float, rng: np.random.Generator):
    """Exact samples of the max and min of a Brownian bridge between step endpoints.

    Max and min are each marginally exact; sampling them independently
    only errs when one bridge nearly attains both extremes, which at
    these step sizes has negligible probability and errs toward reporting
    a wider range (conservative for confinement checks).
    """
    u1 = rng.random(x0.shape)
    u2 = rng.random(x0.shape)
    diff = x1 - x0
    mx = 0.5 * (x0 + x1 + np.sqrt(diff**2 - 2.0 * dt * np.log(u1)))
    mn = 0.5 * (x0 + x1 - np.sqrt(diff**2 - 2.0 * dt * np.log(u2)))
    return mx, mn


def _confinement_probability(ell: int, replicas: int, rng, steps_per_unit: int, chunk: int) -> float:
    total_steps = int(ell * steps_per_unit)
    dt = ell / total_steps
    stayed = 0
    done = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        x = np.zeros(m)
        inside = np.ones(m, dtype=bool)
        for _ in range(total_steps):
            x1 = x + rng.normal(0.0, math.sqrt(dt), size=m)
            mx, mn = _bridge_extremes(x, x1, dt, rng)
            inside &= (mx <= 1.0) & (mn >= -1.0)
            x = x1
        stayed += int(inside.sum())
        done += m
    return stayed / replicas


def _upper_deviation_probability(ell: int, replicas: int, rng, steps_per_unit: int, chunk: int) -> float:
    total_steps = steps_per_unit
    dt = 1.0 / total_steps
    hits = 0
    done = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        x = np.zeros(m)
        reached = np.zeros(m, dtype=bool)
        for _ in range(total_steps):
            x1 = x + rng.normal(0.0, math.sqrt(dt), size=m)
            mx, _ = _bridge_extremes(x, x1, dt, rng)
            reached |= mx >= ell
            x = x1
        hits += int(reached.sum())
        done += m
    return hits / replicas
