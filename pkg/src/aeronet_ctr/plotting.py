"""Static figures written to files: experiment trends, link activity, pair distance."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .kinematics import pairwise_distance_squared  # noqa: E402
from .timeline import EventTimeline, iter_intervals  # noqa: E402

SWEEP_AXIS = {
    "node_count": "Number of nodes",
    "region_radius": "Region radius (mi)",
    "delay": "Delay bound (periods)",
}

STYLE = {
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_experiment(result, path, title: str | None = None):
    """Mean range per metric against the swept parameter, with one-sigma bars."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        markers = "osD^v<>"
        for k, metric in enumerate(result.metrics):
            x, mean, sd = result.series(metric)
            ax.errorbar(x, mean, yerr=sd, marker=markers[k % len(markers)], capsize=3,
                        linewidth=1.2, markersize=4, label=metric)
        ax.set_xlabel(SWEEP_AXIS[result.plan.sweep])
        ax.set_ylabel("Transmission range (mi)")
        ax.set_xticks(list(result.plan.values))
        if title:
            ax.set_title(title)
        ax.legend()
        _save(fig, path)


def plot_link_timeline(timeline: EventTimeline, path, labels=None, max_pairs: int = 40):
    """One horizontal track per link that is active at some time."""
    spans: dict[tuple, list] = {}
    for piece in iter_intervals(timeline):
        for link in piece.links:
            spans.setdefault(link, []).append((piece.start, piece.end - piece.start))
    pairs = sorted(spans)[:max_pairs]

    def name(v):
        return labels[v] if labels else str(v)

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 0.6 + 0.25 * max(len(pairs), 1)))
        for row, pair in enumerate(pairs):
            # merge touching spans so bars are not drawn as slivers
            merged = []
            for s, w in spans[pair]:
                if merged and abs(merged[-1][0] + merged[-1][1] - s) < 1e-12:
                    merged[-1] = (merged[-1][0], merged[-1][1] + w)
                else:
                    merged.append((s, w))
            ax.broken_barh(merged, (row - 0.35, 0.7), color="tab:blue")
        ax.set_yticks(range(len(pairs)))
        ax.set_yticklabels([f"{name(a)}-{name(b)}" for a, b in pairs])
        ax.set_ylim(-0.6, max(len(pairs), 1) - 0.4)
        t0, t1 = timeline.horizon.window
        ax.set_xlim(t0, t1)
        ax.set_xlabel("Time (h)")
        ax.grid(axis="y", visible=False)
        _save(fig, path)


def plot_distance(scenario, i: int, j: int, level: float, path, samples: int = 2000):
    """Distance between nodes i and j over the horizon with the range level."""
    t0, t1 = scenario.horizon.window
    t = np.linspace(t0, t1, samples)
    s = np.sqrt(np.maximum(pairwise_distance_squared(scenario.trajectories[i],
                                                     scenario.trajectories[j], t), 0.0))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        ax.plot(t, s, linewidth=1.2, label=f"s({scenario.label(i)}, {scenario.label(j)})")
        ax.axhline(level, color="tab:red", linestyle="--", linewidth=1.0, label=f"range {level:g}")
        ax.fill_between(t, s, level, where=s <= level, color="tab:green", alpha=0.15)
        ax.set_xlabel("Time (h)")
        ax.set_ylabel("Distance (mi)")
        ax.legend()
        _save(fig, path)
