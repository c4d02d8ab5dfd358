"""Figures rendered next to the CSV outputs.

Uses the object-oriented Agg API (no pyplot state) and strips PNG metadata
so repeated runs write byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

MATERIAL_COLORS = {"diffuse": "0.25", "glass": "tab:cyan", "dark_absorptive": "tab:purple"}
SENSOR_COLORS = {"us": "tab:blue", "tof": "tab:red"}


def new_figure(width=6.4, height=None, nrows=1, ncols=1, **kwargs):
    golden = (np.sqrt(5) - 1.0) / 2.0
    fig = Figure(figsize=(width, height or width * golden))
    FigureCanvasAgg(fig)
    axes = fig.subplots(nrows, ncols, **kwargs)
    return fig, axes


def save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=110, metadata={"Software": None})
    return path


def draw_environment(ax, env):
    for seg in env.segments:
        color = MATERIAL_COLORS[seg.material.optical_kind]
        lw = 1.0 + 2.0 * (1.0 - seg.material.softness)
        ax.plot([seg.p1[0], seg.p2[0]], [seg.p1[1], seg.p2[1]], color=color, lw=lw, solid_capstyle="butt")
    xmin, ymin, xmax, ymax = env.bounds
    ax.set_xlim(xmin, xmax)
    ax.set_ylim(ymin, ymax)
    ax.set_aspect("equal")


def plot_noise(rows, samples: dict, path):
    """Filtered noise std per (K_s, K_f) and box plots of the pooled samples."""
    fig, (ax_std, ax_box) = new_figure(9.0, 3.6, 1, 2)
    labels = [f"Ks={r.k_slow} Kf={r.k_fast}" for r in rows]
    ax_std.bar(labels, [r.std for r in rows], color="tab:blue")
    ax_std.set_ylabel("noise std [AU]")
    ax_std.tick_params(axis="x", labelrotation=20)
    ax_box.boxplot([samples[(r.k_slow, r.k_fast)] for r in rows], flierprops={"markersize": 2})
    ax_box.set_xticks(range(1, len(rows) + 1), labels, rotation=20)
    ax_box.set_ylabel("magnitude [AU]")
    fig.tight_layout()
    return save(fig, path)


def plot_characterization(result, path):
    fig, ax = new_figure(7.0, 3.8)
    ranges = result.ranges
    colors = _spread_colors(len(result.distances))
    for color, d in zip(colors, result.distances):
        prof = result.profiles[d]
        ax.plot(ranges, prof["mean"], color=color, lw=1.0, label=f"{d:.2f} m")
        ax.fill_between(ranges, prof["min"], prof["max"], color=color, alpha=0.2, lw=0)
    ax.axhline(result.threshold, color="k", ls="--", lw=0.8)
    ax.set_xlabel("range [m]")
    ax.set_ylabel("filtered magnitude [AU]")
    ax.set_title(f"wall at {result.angle_deg:.0f} deg, {result.material_label}")
    ax.legend(fontsize=6, ncol=2)
    fig.tight_layout()
    return save(fig, path)


def _spread_colors(n):
    from matplotlib import colormaps

    cmap = colormaps["viridis"]
    return [cmap(x) for x in np.linspace(0.0, 0.9, max(n, 1))]


def plot_trajectories(env, records, path, title=""):
    fig, ax = new_figure(7.0, 5.0)
    draw_environment(ax, env)
    colors = _spread_colors(len(records))
    for color, rec in zip(colors, records):
        xs = [r.x for r in rec.rows]
        ys = [r.y for r in rec.rows]
        ax.plot(xs, ys, color=color, lw=0.6, alpha=0.8)
        if rec.crashed and rec.final_state is not None:
            ax.plot(*rec.final_state.position, marker="x", color="tab:red", ms=6)
    ax.set_title(title)
    fig.tight_layout()
    return save(fig, path)


def plot_exploration_summary(tables: dict, path):
    fig, (ax_d, ax_c) = new_figure(7.0, 3.0, 1, 2)
    names = list(tables)
    ax_d.bar(names, [tables[n].mean_distance for n in names], color=[SENSOR_COLORS.get(n, "0.5") for n in names])
    ax_d.set_ylabel("mean distance [m]")
    ax_c.bar(names, [100 * tables[n].crash_rate for n in names], color=[SENSOR_COLORS.get(n, "0.5") for n in names])
    ax_c.set_ylabel("crash rate [%]")
    ax_c.set_ylim(0, 105)
    fig.tight_layout()
    return save(fig, path)


def plot_policy(params, path, max_range=4.6):
    from .control import raw_policy

    d = np.linspace(0.0, max_range, 461)
    out = np.array([raw_policy(float(x), params) for x in d])
    fig, ax_v = new_figure(6.0, 3.2)
    ax_v.plot(d, out[:, 0], color="tab:blue")
    ax_v.set_xlabel("closest obstacle [m]")
    ax_v.set_ylabel("velocity [m/s]", color="tab:blue")
    ax_y = ax_v.twinx()
    ax_y.plot(d, out[:, 1], color="tab:orange")
    ax_y.set_ylabel("yaw rate [deg/s]", color="tab:orange")
    fig.tight_layout()
    return save(fig, path)


def plot_corridor(result, path):
    fig, (ax_w, ax_d) = new_figure(8.0, 5.5, 2, 1, sharex=True)
    x = result.x
    extent = (x[0], x[-1], 0.0, result.ranges[-1])
    ax_w.imshow(
        result.waterfall.T,
        origin="lower",
        aspect="auto",
        extent=extent,
        cmap="magma",
        interpolation="nearest",
    )
    ax_w.set_ylabel("range [m]")
    us = np.array([np.nan if v is None else v for v in result.us_distance])
    tof = np.array([np.nan if v is None else v for v in result.tof_distance])
    ax_d.plot(x, us, ".", ms=1.5, color=SENSOR_COLORS["us"], label="ultrasound")
    ax_d.plot(x, tof, ".", ms=1.5, color=SENSOR_COLORS["tof"], label="laser ToF")
    for region in result.regions:
        ax_d.axvspan(region.x_min, region.x_max, color="0.9", zorder=0)
        ax_d.text((region.x_min + region.x_max) / 2, 0.05, region.name, ha="center", fontsize=7)
    ax_d.set_ylim(0.0, result.ranges[-1])
    ax_d.set_xlabel("lateral position [m]")
    ax_d.set_ylabel("closest obstacle [m]")
    ax_d.legend(fontsize=7, markerscale=5)
    fig.tight_layout()
    return save(fig, path)


def plot_amplitude_law(echo, cfg, threshold, floor, path):
    d = np.linspace(0.3, cfg.max_range, 200)
    fig, ax = new_figure(5.5, 3.2)
    ax.plot(d, floor + echo.amplitude(d), color="tab:blue", label="rigid, boresight")
    ax.plot(d, floor + echo.amplitude(d, bearing=cfg.half_fov), color="tab:green", label="rigid, cone edge")
    ax.axhline(threshold, color="k", ls="--", lw=0.8, label="threshold")
    ax.set_xlabel("range [m]")
    ax.set_ylabel("peak magnitude [AU]")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return save(fig, path)
