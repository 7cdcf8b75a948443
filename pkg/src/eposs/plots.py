"""Figure rendering for experiment reports and fronts."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pareto import ParetoFront, hypervolume


def front_figure(
    fronts: list[tuple[str, ParetoFront]],
    path: str | Path,
    shade_first: bool = True,
) -> Path:
    """Scatter of one or more fronts with the staircase of each.

    The first front's hypervolume region (toward its own auto reference) is
    shaded and its area printed in the legend.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    colors = plt.cm.tab10.colors
    for idx, (label, front) in enumerate(fronts):
        if not front.points:
            continue
        pts = sorted(front.points, key=lambda p: p.makespan)
        xs = [p.makespan for p in pts]
        ys = [p.cost for p in pts]
        color = colors[idx % len(colors)]
        ax.step(xs, ys, where="post", color=color, alpha=0.6)
        area = hypervolume(front)
        ax.scatter(xs, ys, color=color, label=f"{label} (hv={area:.3g})", zorder=3)
        if shade_first and idx == 0 and len(pts) > 1:
            ref_c = max(ys)
            for prev, cur in zip(pts, pts[1:]):
                ax.fill_between(
                    [prev.makespan, cur.makespan],
                    [cur.cost, cur.cost],
                    [ref_c, ref_c],
                    color=color,
                    alpha=0.15,
                    linewidth=0,
                )
    ax.set_xlabel("mean makespan (s)")
    ax.set_ylabel("mean cost ($)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def feasibility_figure(summary: dict, path: str | Path) -> Path:
    """Grouped bars: feasible percentage per algorithm across VM subsets."""
    path = Path(path)
    configs = summary["configurations"]
    algorithms = sorted({c["algorithm"] for c in configs})
    subsets = sorted({c["vm_subset"] for c in configs})
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(1, len(algorithms))
    for ai, algo in enumerate(algorithms):
        xs, ys = [], []
        for si, sub in enumerate(subsets):
            vals = [
                c["feasible_percent"] for c in configs
                if c["algorithm"] == algo and c["vm_subset"] == sub
            ]
            if vals:
                xs.append(si + ai * width)
                ys.append(sum(vals) / len(vals))
        ax.bar(xs, ys, width=width, label=algo)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(subsets))])
    ax.set_xticklabels(subsets)
    ax.set_ylabel("feasible solutions (%)")
    ax.set_ylim(0, 105)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def cost_figure(summary: dict, path: str | Path) -> Path:
    """Grouped bars: mean solution cost per algorithm across VM subsets."""
    path = Path(path)
    configs = summary["configurations"]
    algorithms = sorted({c["algorithm"] for c in configs})
    subsets = sorted({c["vm_subset"] for c in configs})
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(1, len(algorithms))
    for ai, algo in enumerate(algorithms):
        xs, ys = [], []
        for si, sub in enumerate(subsets):
            vals = [
                c["mean_cost"] for c in configs
                if c["algorithm"] == algo and c["vm_subset"] == sub
                and c["mean_cost"] is not None
            ]
            if vals:
                xs.append(si + ai * width)
                ys.append(sum(vals) / len(vals))
        ax.bar(xs, ys, width=width, label=algo)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(subsets))])
    ax.set_xticklabels(subsets)
    ax.set_ylabel("mean cost ($)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(rows, summary: dict, out_dir: str | Path) -> dict[str, Path]:
    """All report figures: feasibility/cost overviews plus one figure per front."""
    out = Path(out_dir)
    paths: dict[str, Path] = {}
    if summary["configurations"]:
        paths["fig_feasibility"] = feasibility_figure(summary, out / "summary_feasibility.png")
        paths["fig_cost"] = cost_figure(summary, out / "summary_cost.png")
    for row in rows:
        if row.front is not None and row.front.points:
            name = f"front_row{row.index:05d}.png"
            label = f"{row.workflow}/{row.vm_subset} (p_t={row.p_t:g})"
            paths[name] = front_figure([(label, row.front)], out / name)
    return paths
