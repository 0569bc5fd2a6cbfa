"""Mission artifacts: the tick-by-tick CSV, a JSON summary and one CSV of
plot data per figure.

Every file starts with two comment lines carrying the config hash and the
seed, so artifacts are self-identifying and reruns can be compared byte for
byte. Floats are written with ``repr`` (shortest round-trip form), which is
deterministic across runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .mission import MissionLog

MISSION_COLUMNS = [
    "time", "x", "y", "z", "psi", "u_r", "v_r", "w_r", "r_r",
    "tau_po", "tau_s", "tau_ve", "tau_l",
    "min_residual", "obstacle_clearance",
    "solver_cost", "solver_iterations", "solver_violation", "solver_converged",
    "waypoint", "lap", "energy",
]


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, meta: dict, columns: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_mission_csv(log: MissionLog, path, meta: dict) -> None:
    rows = []
    for r in log.records:
        s, tau = r.state, r.applied
        rows.append([
            r.time, s.x, s.y, s.z, s.psi, s.u_r, s.v_r, s.w_r, s.r_r,
            tau.tau_po, tau.tau_s, tau.tau_ve, tau.tau_l,
            r.min_residual, r.obstacle_clearance,
            r.solver_cost, r.solver_iterations, r.solver_violation,
            r.solver_converged, r.waypoint, r.lap, r.energy,
        ])
    _write_csv(Path(path), meta, MISSION_COLUMNS, rows)


def write_summary_json(log: MissionLog, path, meta: dict) -> dict:
    min_res = min((r.min_residual for r in log.records), default=None)
    min_obs = min((r.obstacle_clearance for r in log.records), default=None)
    if min_obs is not None and math.isinf(min_obs):
        min_obs = None  # no obstacles configured
    summary = {
        "outcome": log.outcome,
        "ticks": len(log.records),
        "duration": log.duration,
        "energy": log.energy,
        "min_residual": min_res,
        "min_obstacle_clearance": min_obs,
        "legs": [{"lap": leg.lap, "waypoint": leg.waypoint, "time": leg.time}
                 for leg in log.legs],
        "initial_state": log.initial_state.as_array().tolist(),
        "waypoints": [w.as_array().tolist() for w in log.config.waypoints],
        **meta,
    }
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def write_figure_data(log: MissionLog, out_dir, meta: dict) -> list[str]:
    """Plot-ready CSVs, one per figure; returns the file names written."""
    out_dir = Path(out_dir)
    cfg = log.config
    ws = cfg.workspace
    init = log.initial_state
    records = log.records

    _write_csv(out_dir / "fig_trajectory_xy.csv", meta, ["time", "x", "y"],
               [[0.0, init.x, init.y]]
               + [[r.time, r.state.x, r.state.y] for r in records])

    shapes = []
    for m, obs in enumerate(ws.obstacles):
        shapes.append(["obstacle", f"obstacle_{m + 1}",
                       float(obs.center[0]), float(obs.center[1]), obs.radius])
        shapes.append(["safe_zone", f"obstacle_{m + 1}",
                       float(obs.center[0]), float(obs.center[1]),
                       obs.radius + ws.r_bar])
    for i, wp in enumerate(cfg.waypoints):
        shapes.append(["terminal", f"waypoint_{i + 1}", wp.x, wp.y,
                       cfg.ocp.terminal.radius])
    _write_csv(out_dir / "fig_trajectory_xy_shapes.csv", meta,
               ["kind", "label", "cx", "cy", "radius"], shapes)

    z_lo = float(ws.box_min[2] + ws.r_bar)
    z_hi = float(ws.box_max[2] - ws.r_bar)
    _write_csv(out_dir / "fig_depth_yaw.csv", meta,
               ["time", "z", "psi", "z_min", "z_max"],
               [[0.0, init.z, init.psi, z_lo, z_hi]]
               + [[r.time, r.state.z, r.state.psi, z_lo, z_hi] for r in records])

    _write_csv(out_dir / "fig_planar_speed.csv", meta,
               ["time", "planar_speed", "bound"],
               [[r.time, cfg.bounds.planar_speed(r.state.u_r, r.state.v_r),
                 cfg.bounds.v_planar_max] for r in records])

    _write_csv(out_dir / "fig_heave_yaw_rates.csv", meta,
               ["time", "w_r", "r_r", "w_bound", "r_bound"],
               [[r.time, r.state.w_r, r.state.r_r, cfg.bounds.w_max,
                 cfg.bounds.r_max] for r in records])

    tb = cfg.ocp.thrust_max
    _write_csv(out_dir / "fig_thrusts.csv", meta,
               ["time", "tau_po", "tau_s", "tau_ve", "tau_l",
                "max_po", "max_s", "max_ve", "max_l"],
               [[r.time, r.applied.tau_po, r.applied.tau_s, r.applied.tau_ve,
                 r.applied.tau_l, float(tb[0]), float(tb[1]), float(tb[2]),
                 float(tb[3])] for r in records])

    return ["fig_trajectory_xy.csv", "fig_trajectory_xy_shapes.csv",
            "fig_depth_yaw.csv", "fig_planar_speed.csv",
            "fig_heave_yaw_rates.csv", "fig_thrusts.csv"]
