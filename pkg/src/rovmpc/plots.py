"""Render mission figures to PNG files.

One figure per report CSV: horizontal trajectory with obstacle and
safe-zone circles, depth/yaw traces, planar speed, heave/yaw rates and the
four thruster commands, each with its constraint lines. Rendering is
headless (Agg) and deterministic so report directories diff cleanly.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .mission import MissionLog  # noqa: E402

_BOUND_STYLE = dict(color="tab:red", linestyle="--", linewidth=1.0)
_PNG_METADATA = {"Software": "rovmpc"}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=130, metadata=_PNG_METADATA)
    plt.close(fig)


def _circle(ax, center, radius, **kw):
    ax.add_patch(plt.Circle((center[0], center[1]), radius, fill=False, **kw))


def plot_trajectory_xy(log: MissionLog, path) -> None:
    cfg = log.config
    ws = cfg.workspace
    xs = [log.initial_state.x] + [r.state.x for r in log.records]
    ys = [log.initial_state.y] + [r.state.y for r in log.records]
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    ax.plot(xs, ys, color="tab:blue", linewidth=1.2, label="vehicle center")
    ax.plot(xs[0], ys[0], "ks", markersize=5, label="start")
    for obs in ws.obstacles:
        _circle(ax, obs.center, obs.radius, color="black", linewidth=1.4)
        _circle(ax, obs.center, obs.radius + ws.r_bar, color="tab:red",
                linestyle="--", linewidth=1.0)
    for i, wp in enumerate(cfg.waypoints):
        ax.plot(wp.x, wp.y, "g*", markersize=10)
        _circle(ax, (wp.x, wp.y), cfg.ocp.terminal.radius, color="tab:green",
                linestyle=":", linewidth=1.0)
        ax.annotate(f"wp{i + 1}", (wp.x, wp.y), textcoords="offset points",
                    xytext=(6, 6), fontsize=9)
    # Usable region for the vehicle center: box inset by the bounding radius.
    lo = ws.box_min + ws.r_bar
    hi = ws.box_max - ws.r_bar
    ax.plot([lo[0], hi[0], hi[0], lo[0], lo[0]],
            [lo[1], lo[1], hi[1], hi[1], lo[1]],
            color="tab:red", linestyle="--", linewidth=1.0, label="wall limit")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("Trajectory in the horizontal plane")
    _save(fig, path)


def plot_depth_yaw(log: MissionLog, path) -> None:
    cfg = log.config
    t = [0.0] + [r.time for r in log.records]
    z = [log.initial_state.z] + [r.state.z for r in log.records]
    psi = [log.initial_state.psi] + [r.state.psi for r in log.records]
    z_lo = cfg.workspace.box_min[2] + cfg.workspace.r_bar
    z_hi = cfg.workspace.box_max[2] - cfg.workspace.r_bar
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True)
    ax1.plot(t, z, color="tab:blue")
    ax1.axhline(z_lo, **_BOUND_STYLE)
    ax1.axhline(z_hi, **_BOUND_STYLE)
    ax1.set_ylabel("z [m]")
    ax2.plot(t, psi, color="tab:blue")
    ax2.set_ylabel("yaw [rad]")
    ax2.set_xlabel("time [s]")
    ax2.set_ylim(-math.pi - 0.3, math.pi + 0.3)
    fig.suptitle("Vertical position and heading")
    _save(fig, path)


def plot_planar_speed(log: MissionLog, path) -> None:
    cfg = log.config
    t = [r.time for r in log.records]
    speed = [cfg.bounds.planar_speed(r.state.u_r, r.state.v_r)
             for r in log.records]
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.plot(t, speed, color="tab:blue")
    ax.axhline(cfg.bounds.v_planar_max, **_BOUND_STYLE)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("|u_r + v_r| [m/s]")
    ax.set_title("Planar relative speed")
    _save(fig, path)


def plot_heave_yaw_rates(log: MissionLog, path) -> None:
    cfg = log.config
    t = [r.time for r in log.records]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.0), sharex=True)
    ax1.plot(t, [r.state.w_r for r in log.records], color="tab:blue")
    for b in (cfg.bounds.w_max, -cfg.bounds.w_max):
        ax1.axhline(b, **_BOUND_STYLE)
    ax1.set_ylabel("w_r [m/s]")
    ax2.plot(t, [r.state.r_r for r in log.records], color="tab:blue")
    for b in (cfg.bounds.r_max, -cfg.bounds.r_max):
        ax2.axhline(b, **_BOUND_STYLE)
    ax2.set_ylabel("r_r [rad/s]")
    ax2.set_xlabel("time [s]")
    fig.suptitle("Heave and yaw-rate")
    _save(fig, path)


def plot_thrusts(log: MissionLog, path) -> None:
    cfg = log.config
    t = [r.time for r in log.records]
    taus = np.array([r.applied.as_array() for r in log.records]) \
        if log.records else np.zeros((0, 4))
    names = ("port", "starboard", "vertical", "lateral")
    fig, axes = plt.subplots(4, 1, figsize=(7.0, 7.5), sharex=True)
    for i, ax in enumerate(axes):
        ax.plot(t, taus[:, i], color="tab:blue", linewidth=0.9)
        for b in (cfg.ocp.thrust_max[i], -cfg.ocp.thrust_max[i]):
            ax.axhline(b, **_BOUND_STYLE)
        ax.set_ylabel(f"{names[i]} [N]")
    axes[-1].set_xlabel("time [s]")
    fig.suptitle("Thruster commands")
    _save(fig, path)


def render_all(log: MissionLog, out_dir) -> list[str]:
    """Write every mission figure into ``out_dir``; returns the file names."""
    jobs = [
        ("fig_trajectory_xy.png", plot_trajectory_xy),
        ("fig_depth_yaw.png", plot_depth_yaw),
        ("fig_planar_speed.png", plot_planar_speed),
        ("fig_heave_yaw_rates.png", plot_heave_yaw_rates),
        ("fig_thrusts.png", plot_thrusts),
    ]
    written = []
    for name, fn in jobs:
        fn(log, out_dir / name)
        written.append(name)
    return written
