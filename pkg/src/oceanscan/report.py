"""Figure rendering for the report paths: scaling curves, track overviews,
depth profiles, and partition block diagrams. Figures land next to the
delimited output they illustrate."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_bench(records, path, title=None):
    """Runtime curves from benchmark records grouped by data scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    by_scale = {}
    for r in records:
        by_scale.setdefault(r.data_scale, []).append(r)
    for scale, recs in sorted(by_scale.items()):
        recs = sorted(recs, key=lambda r: r.workers)
        ax.plot([r.workers for r in recs], [r.wall_clock for r in recs],
                marker="o", label=f"scale {scale}V")
    ax.set_xlabel("workers")
    ax.set_ylabel("wall clock (s)")
    ax.set_xscale("log", base=2)
    ax.grid(True, alpha=0.3)
    if len(by_scale) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_scale_sweep(records, path, title=None):
    """Runtime against data scale at fixed workers."""
    fig, ax = plt.subplots(figsize=(6, 4))
    recs = sorted(records, key=lambda r: r.data_scale)
    ax.plot([r.data_scale for r in recs], [r.wall_clock for r in recs], marker="o")
    ax.set_xlabel("data scale (multiples of V)")
    ax.set_ylabel("wall clock (s)")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_tracks(graph, tracks, path):
    """Track centroid polylines over the lat-lon plane, colored by track."""
    fig, ax = plt.subplots(figsize=(6, 5))
    by_id = {(v.time_step, v.label): v for v in graph.vertices}
    for v in graph.vertices:
        ax.plot(v.centroid[1], v.centroid[0], ".", color="0.8", markersize=3)
    for idx, track in enumerate(tracks):
        lats = [by_id[v].centroid[0] for v in track]
        lons = [by_id[v].centroid[1] for v in track]
        ax.plot(lons, lats, marker="o", markersize=3, label=f"track {idx} (len {len(track)})")
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    if tracks:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_profile(profile, path):
    """Per-field value against depth, one line per time step."""
    fields = list(profile.samples.keys())
    fig, axes = plt.subplots(1, max(len(fields), 1), figsize=(3.2 * max(len(fields), 1), 4.5),
                             sharey=True, squeeze=False)
    for ax, f in zip(axes[0], fields):
        for k, t in enumerate(profile.time_steps):
            ax.plot(profile.samples[f][k], profile.depths, label=f"t={t}")
        ax.set_xlabel(f)
        ax.grid(True, alpha=0.3)
    axes[0][0].set_ylabel("depth (m)")
    axes[0][0].invert_yaxis()
    if profile.time_steps and fields:
        axes[0][-1].legend(fontsize=7)
    fig.suptitle(f"needle at {profile.position[1]:.2f}N {profile.position[0]:.2f}E", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_partition(plan, ocean_mask, path):
    """Block diagram of a partition plan over the surface ocean mask."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    surface = ocean_mask[0] if ocean_mask.ndim == 3 else ocean_mask
    ax.imshow(surface, origin="lower", cmap="Blues", alpha=0.5)
    cmap = plt.get_cmap("tab20")
    for block in plan.blocks:
        (d0, d1), (i0, i1), (j0, j1) = block.ranges
        if plan.scheme == "depthSlab":
            label = f"w{block.owner}: d[{d0},{d1})"
            ax.text(surface.shape[1] / 2, surface.shape[0] * (0.1 + 0.8 * block.owner / len(plan.blocks)),
                    label, ha="center", fontsize=8)
        else:
            ax.add_patch(plt.Rectangle((j0 - 0.5, i0 - 0.5), j1 - j0, i1 - i0,
                                       fill=True, alpha=0.35,
                                       facecolor=cmap(block.owner % 20),
                                       edgecolor="k", linewidth=1.0))
            ax.text((j0 + j1) / 2, (i0 + i1) / 2, str(block.owner), ha="center", va="center")
    ax.set_xlabel("lon index")
    ax.set_ylabel("lat index")
    ax.set_title(f"{plan.scheme}, {len(plan.blocks)} blocks, ghost width {plan.ghost_width}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
