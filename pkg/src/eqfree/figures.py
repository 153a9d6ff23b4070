"""Matplotlib renderings for the CLI reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .process import LeafStatus, SolutionTree  # noqa: E402
from .traces import Trace, TraceReport  # noqa: E402

STATUS_COLORS = {
    LeafStatus.SOLVED: "tab:green",
    LeafStatus.INCONSISTENT: "tab:red",
    LeafStatus.EXHAUSTED: "tab:orange",
    LeafStatus.REPEAT: "tab:gray",
    None: "tab:blue",
}


def tree_figure(tree: SolutionTree, path: str | Path) -> Path:
    """Nodes by depth and complexity, colored by leaf status."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for status, color in STATUS_COLORS.items():
        pts = [(n.depth, n.tau) for n in tree.nodes.values() if n.status is status]
        if pts:
            xs, ys = zip(*pts)
            label = "inner" if status is None else status.value
            ax.scatter(xs, ys, s=14, c=color, label=label, alpha=0.8)
    ax.set_xlabel("depth")
    ax.set_ylabel("complexity")
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.yaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_title(f"solution tree, {tree.n_nodes} nodes")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def trace_figure(trace: Trace, report: TraceReport, path: str | Path) -> Path:
    """Interval length and complexity along a trace; reducing paths shaded."""
    path = Path(path)
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    xs = list(range(len(trace.steps)))
    top.plot(xs, [s.interval for s in trace.steps], "-", color="black", lw=1)
    ent = [i for i, s in enumerate(trace.steps) if s.op == "entire"]
    top.plot(ent, [trace.steps[i].interval for i in ent], "o", ms=3, color="tab:blue", label="entire step")
    for run in report.runs:
        for p in run.paths:
            a, b = run.steps[p.start], run.steps[min(p.end, len(run.steps) - 1)]
            top.axvspan(a, b, color="tab:green", alpha=0.08)
    top.set_ylabel("interval length")
    top.legend(fontsize=8)
    bottom.step(xs, [s.tau for s in trace.steps], where="post", color="tab:purple")
    bottom.set_ylabel("complexity")
    bottom.set_xlabel("step")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def drop_figure(ratios: list[float], path: str | Path) -> Path:
    """Histogram of measured drop over carrier length for reducing paths."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(ratios, bins=20, color="tab:blue", alpha=0.8)
    ax.axvline(0.1, color="tab:red", ls="--", label="1/10")
    ax.set_xlabel("drop / carrier length")
    ax.set_ylabel("paths")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
