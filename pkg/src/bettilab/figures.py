"""Figure rendering for experiment reports.

Every renderer takes a report dict (the JSON form) and an output directory
and writes one or more PNG files, returning their paths.  Figures are a
side channel: report JSON never references them.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _path(outdir: str, name: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, name)


def _roots_figure(report: dict, outdir: str) -> list:
    rows = report["per_sample"]
    counts = np.array([r["count"] for r in rows])
    d = report["config"]["params"]["d"]
    fig, ax = plt.subplots(figsize=(6, 4))
    lo, hi = counts.min(), counts.max()
    ax.hist(counts, bins=np.arange(lo - 0.5, hi + 1.5), color="#4878a8", edgecolor="white")
    ax.axvline(math.sqrt(d), color="crimson", ls="--", label=r"$\sqrt{d}$")
    ax.axvline(counts.mean(), color="black", ls=":", label="sample mean")
    ax.set_xlabel("real projective roots")
    ax.set_ylabel("samples")
    ax.set_title("degree %d, %d samples" % (d, len(rows)))
    ax.legend()
    p = _path(outdir, "roots_d%d.png" % d)
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [p]


def _curves_figure(report: dict, outdir: str) -> list:
    per_d = report["summary"]["per_degree"]
    ds = sorted(int(k) for k in per_d)
    means = [per_d[str(d)]["mean"] / d for d in ds]
    errs = [per_d[str(d)]["stderr"] / d for d in ds]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(ds, means, yerr=errs, fmt="o-", capsize=4, color="#4878a8")
    ax.set_xlabel("degree d")
    ax.set_ylabel("mean components / d")
    ax.set_title("curve components per degree (exploratory trend)")
    p = _path(outdir, "curves_trend.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [p]


def _sup_figure(report: dict, outdir: str) -> list:
    rows = report["per_sample"]
    f2 = np.array([r["sup_f2"] for r in rows])
    df2 = np.array([r["sup_df2"] for r in rows])
    log_rho = report["config"]["params"]["log_rho"]
    n = report["config"]["params"]["n"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, vals, label, lim in (
        (axes[0], f2, r"$\sup |f|^2$", 0.5 * math.exp(log_rho)),
        (axes[1], df2, r"$\sup \|df\|^2$", 0.5 * math.pi * n * math.exp(log_rho)),
    ):
        ax.hist(vals, bins=40, color="#4878a8", edgecolor="white")
        ax.axvline(vals.mean(), color="black", ls=":", label="mean")
        if lim < 20 * vals.max():
            ax.axvline(lim, color="crimson", ls="--", label="growth bound")
        ax.set_xlabel(label)
        ax.legend()
    axes[0].set_ylabel("samples")
    p = _path(outdir, "sup_norms.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [p]


def _presence_figure(report: dict, outdir: str) -> list:
    s = report["summary"]
    rows = report["per_sample"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].bar([0], [s["estimate"]], color="#4878a8", width=0.5)
    axes[0].errorbar(
        [0],
        [s["estimate"]],
        yerr=[[s["estimate"] - s["wilson_lower"]], [0.0]],
        fmt="none",
        ecolor="black",
        capsize=6,
    )
    axes[0].set_xticks([0])
    axes[0].set_xticklabels(["compact loop present"])
    axes[0].set_ylabel("rate (Wilson lower whisker)")
    axes[0].set_ylim(0, 1)
    counts = np.array([r["count"] for r in rows if r["confident"]])
    hi = counts.max() if counts.size else 1
    axes[1].hist(counts, bins=np.arange(-0.5, hi + 1.5), color="#4878a8", edgecolor="white")
    axes[1].set_xlabel("compact components in the ball")
    axes[1].set_ylabel("samples")
    p = _path(outdir, "presence.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [p]


def _betti_figure(report: dict, outdir: str) -> list:
    rows = report["per_sample"]
    labels = [r["class"] for r in rows]
    # contributions are doubly exponentially small; plot ln(-ln c) per class
    heights = []
    for r in rows:
        c = r["contribution"]
        if c["sign"] > 0 and c["log"] < 0:
            heights.append(math.log(-c["log"]))
        else:
            heights.append(0.0)
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(rows), 4))
    ax.bar(range(len(rows)), heights, color="#4878a8")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(r"$\ln(-\ln\,c_i)$  (smaller is stronger)")
    n = report["config"]["params"]["n"]
    i = report["config"]["params"]["i"]
    ax.set_title("catalog contributions, n=%d, i=%d" % (n, i))
    p = _path(outdir, "betti_catalog_n%d_i%d.png" % (n, i))
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [p]


_RENDERERS = {
    "kostlan-roots": _roots_figure,
    "kostlan-curves": _curves_figure,
    "sup-norm": _sup_figure,
    "local-presence": _presence_figure,
    "betti-bound": _betti_figure,
}


def render_report(report_dict: dict, outdir: str) -> list:
    """Write the figures for one report; returns the file paths."""
    name = report_dict["config"]["experiment"]
    fn = _RENDERERS.get(name)
    if fn is None:
        return []
    return fn(report_dict, outdir)


def sign_grid_figure(values, xs, ys, path: str, title: str = "") -> str:
    """Sign plot of a grid (values[i, j] = f(xs[i], ys[j])) with zero contour."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 5))
    V = np.asarray(values)
    ax.pcolormesh(xs, ys, np.sign(V).T, cmap="RdBu", vmin=-1.5, vmax=1.5, shading="auto")
    try:
        ax.contour(xs, ys, V.T, levels=[0.0], colors="black", linewidths=1.0)
    except Exception:
        pass
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
