"""Figure rendering for completed runs: one PNG per table worth plotting.

Figures are rebuilt from the CSV artifacts alone, so a run directory can
be re-rendered at any time. Everything goes through the Agg backend and
fixed fonts so output is stable across report invocations.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGSIZE = (6.0, 4.0)
DPI = 130


def _read_csv(path: Path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols: dict[str, list[str]] = {name: [] for name in reader.fieldnames or []}
        for row in reader:
            for k, v in row.items():
                cols[k].append(v)
    return cols


def _col(cols, name, typ=float) -> np.ndarray:
    return np.array([typ(v) for v in cols[name]])


def _save(fig, out_dir: Path, name: str, written: list[Path]) -> None:
    path = out_dir / name
    fig.savefig(path, dpi=DPI, metadata={"Software": "frogsim"})
    plt.close(fig)
    written.append(path)


def render_figures(out_dir: Path) -> list[Path]:
    """Render every figure supported by the CSVs present in out_dir."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    renderers = {
        "passage.csv": _fig_passage,
        "radii.csv": _fig_radii,
        "front.csv": _fig_front,
        "window_counts.csv": _fig_window_counts,
        "cluster_survival.csv": _fig_cluster_tail,
        "crossing.csv": _fig_crossing,
        "bisection_trace.csv": _fig_bisection,
        "bm_bounds.csv": _fig_bm_bounds,
        "tau_samples.csv": _fig_tau,
        "generation_sizes.csv": _fig_generations,
    }
    for name, fn in renderers.items():
        path = out_dir / name
        if path.exists():
            fn(_read_csv(path), out_dir, written)
    return written


def _fig_passage(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ns = _col(cols, "n")
    ts = _col(cols, "passage_time")
    rays = _col(cols, "ray", int)
    awake = _col(cols, "awake", int).astype(bool)
    for ray in np.unique(rays):
        m = (rays == ray) & awake
        ax.plot(ns[m], ts[m], ".", ms=3, alpha=0.4, label=f"ray e{ray + 1}")
        grid = np.unique(ns[m])
        means = [ts[m][ns[m] == n].mean() for n in grid]
        ax.plot(grid, means, "-", lw=1.5)
    ax.set_xlabel("n (distance along ray)")
    ax.set_ylabel("passage time T(0, x_n)")
    ax.legend()
    ax.set_title("Passage times along rays")
    fig.tight_layout()
    _save(fig, out_dir, "passage.png", written)


def _fig_radii(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    reps = _col(cols, "replica", int)
    t = _col(cols, "t")
    out_r = _col(cols, "out_radius")
    in_r = _col(cols, "in_radius")
    for rep in np.unique(reps)[:8]:
        m = reps == rep
        ax.plot(t[m], out_r[m], "-", color="tab:red", alpha=0.5, lw=0.8)
        ax.plot(t[m], in_r[m], "-", color="tab:blue", alpha=0.5, lw=0.8)
    ax.plot([], [], color="tab:red", label="out-radius")
    ax.plot([], [], color="tab:blue", label="covered in-radius")
    ax.set_xlabel("t")
    ax.set_ylabel("radius")
    ax.legend()
    ax.set_title("Activated-set radii")
    fig.tight_layout()
    _save(fig, out_dir, "radii.png", written)


def _fig_front(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    regime = np.array(cols["regime"])
    reps = _col(cols, "replica", int)
    t = _col(cols, "t")
    front = _col(cols, "front")
    colors = {"critical": "tab:red", "subcritical": "tab:blue"}
    for reg in ("critical", "subcritical"):
        sel = regime == reg
        for rep in np.unique(reps[sel])[:6]:
            m = sel & (reps == rep)
            keep = front[m] > 0
            ax.loglog(t[m][keep], front[m][keep], "-", color=colors[reg], alpha=0.5, lw=0.8)
        ax.plot([], [], color=colors[reg], label=reg)
    ax.set_xlabel("t")
    ax.set_ylabel("right front R_t")
    ax.legend()
    ax.set_title("Right-front trajectories (log-log)")
    fig.tight_layout()
    _save(fig, out_dir, "front.png", written)


def _fig_window_counts(cols, out_dir, written):
    names = [k for k in cols if k.startswith("count_w")]
    fig, axes = plt.subplots(1, len(names), figsize=(3.2 * len(names), 3.4), squeeze=False)
    for ax, name in zip(axes[0], names):
        counts = _col(cols, name, int)
        kmax = counts.max()
        ax.hist(counts, bins=np.arange(kmax + 2) - 0.5, density=True, alpha=0.7)
        mean = counts.mean()
        if mean > 0:
            ks = np.arange(kmax + 1)
            pmf = np.exp(ks * np.log(mean) - mean - np.cumsum(np.log(np.maximum(ks, 1))))
            ax.plot(ks, pmf, "k.-", ms=4, lw=1, label=f"Poisson({mean:.2f})")
        ax.set_title(name)
        ax.legend(fontsize=7)
    fig.suptitle("Window counts vs Poisson")
    fig.tight_layout()
    _save(fig, out_dir, "window_counts.png", written)


def _fig_cluster_tail(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    k = _col(cols, "k")
    s = _col(cols, "survival")
    keep = s > 0
    ax.semilogy(k[keep], s[keep], "o", ms=3)
    ax.set_xlabel("k")
    ax.set_ylabel("P[size > k]")
    ax.set_title("Origin-cluster size survival")
    fig.tight_layout()
    _save(fig, out_dir, "cluster_tail.png", written)


def _fig_crossing(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    mode = np.array(cols["mode"])
    n = _col(cols, "n")
    p = _col(cols, "p_hat")
    lo = _col(cols, "ci_lo")
    hi = _col(cols, "ci_hi")
    for m, marker in (("critical", "o"), ("subcritical", "s"), ("leftmost_from_ball", "^")):
        sel = mode == m
        if sel.any():
            ax.errorbar(n[sel], p[sel], yerr=[p[sel] - lo[sel], hi[sel] - p[sel]],
                        marker=marker, ls="-", capsize=3, label=m)
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("crossing probability")
    ax.legend()
    ax.set_title("Sponge-crossing estimates")
    fig.tight_layout()
    _save(fig, out_dir, "crossing.png", written)


def _fig_bisection(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    r_mid = _col(cols, "r_mid")
    p_hat = _col(cols, "p_hat")
    tags = np.array(cols["tag"])
    for tag in np.unique(tags):
        m = tags == tag
        ax.plot(r_mid[m], p_hat[m], "o-", ms=4, alpha=0.7, label=tag)
    ax.axhline(0.5, color="k", lw=0.8, ls="--")
    ax.set_xlabel("connection radius r")
    ax.set_ylabel("crossing probability")
    ax.legend(fontsize=7)
    ax.set_title("Critical-radius bisection")
    fig.tight_layout()
    _save(fig, out_dir, "critical_radius.png", written)


def _fig_bm_bounds(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    checks = np.array(cols["check"])
    ell = _col(cols, "ell", int)
    emp = _col(cols, "empirical")
    bound = _col(cols, "bound")
    width = 0.35
    for k, (name, off) in enumerate((("confinement", -width / 2), ("upper_deviation", width / 2))):
        m = checks == name
        ax.bar(ell[m] + off, emp[m], width, label=f"{name} (empirical)", alpha=0.8)
        ax.plot(ell[m] + off, bound[m], "k_", ms=16, mew=2)
    ax.plot([], [], "k_", label="bound")
    ax.set_yscale("log")
    ax.set_xlabel("multiplier")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    ax.set_title("Brownian confinement / deviation bounds")
    fig.tight_layout()
    _save(fig, out_dir, "bm_bounds.png", written)


def _fig_tau(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    fam = np.array(cols["family"])
    tau = _col(cols, "tau")
    for f in np.unique(fam):
        x = np.sort(tau[fam == f])
        surv = 1.0 - np.arange(1, x.size + 1) / x.size
        keep = surv > 0
        ax.semilogy(x[keep], surv[keep], lw=1.2, label=f)
    grid = np.linspace(0, tau.max(), 80)
    ax.semilogy(grid, np.exp(-grid), "k--", lw=1, label="exp(-s)")
    ax.set_xlabel("s")
    ax.set_ylabel("P(tau > s)")
    ax.legend()
    ax.set_title("Surgery stopping-time survival")
    fig.tight_layout()
    _save(fig, out_dir, "tau_survival.png", written)


def _fig_generations(cols, out_dir, written):
    fig, ax = plt.subplots(figsize=FIGSIZE)
    n = _col(cols, "generation", int)
    mean = _col(cols, "mean_size")
    se = _col(cols, "se")
    target = _col(cols, "mu_hat_power")
    ax.errorbar(n, mean, yerr=1.96 * se, fmt="o", capsize=3, label="mean |Z_n|")
    ax.plot(n, target, "k--", lw=1, label="mu_hat^n")
    ax.set_yscale("log")
    ax.set_xlabel("generation n")
    ax.set_ylabel("mean size")
    ax.legend()
    ax.set_title("Branching generation growth")
    fig.tight_layout()
    _save(fig, out_dir, "generations.png", written)
