"""Mission configuration: one JSON document, strictly validated.

Top-level sections: ``vehicle``, ``workspace``, ``currents``, ``ocp``,
``solver``, ``mission``. Unknown keys anywhere are errors (typos in bound
names must not silently fall back to defaults); messages carry the best
line anchor we can recover from the raw text.

Example document (see configs/ for complete files):

    {
      "vehicle":   {"m11": 20.0, ..., "thruster_matrix": [[...], ...], "dt": 0.1},
      "workspace": {"box_min": [...], "box_max": [...], "r_bar": 0.3,
                    "obstacles": [{"center": [...], "radius": 0.16, "pillar": true}],
                    "velocity_bounds": {"v_planar_max": 0.5, "w_max": 0.25, "r_max": 1.0}},
      "currents":  {"controller": {"type": "uniform", "velocity": [...]},
                    "truth":      {"type": "grid", "path": "flow.txt"}},
      "ocp":       {"horizon": 15, "q_weights": [...], "r_weights": [...],
                    "p_weights": [...], "thrust_max": 12.0,
                    "terminal_radius": 0.3, "terminal_yaw": 0.15,
                    "constraint_margin": 0.02},
      "solver":    {"grad_tol": 1e-3, ...},
      "mission":   {"initial_state": [x, y, z, psi], "waypoints": [[...], ...],
                    "laps": 3, "tick": 0.1, "truth_substeps": 5, ...}
    }

States may be given as 4 numbers (pose, zero velocities) or all 8.
Grid file paths are resolved relative to the config file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .currents import CurrentField, CurrentGrid, JetCurrent, UniformCurrent
from .dynamics import VehicleParams, VehicleState, default_params
from .errors import ConfigError
from .mission import MissionConfig
from .ocp import OcpSettings, TerminalRegion
from .solver import SolverConfig
from .workspace import Sphere, VelocityBounds, Workspace


@dataclass(frozen=True)
class ConfigDoc:
    """Raw config text plus its source name, for error anchoring."""

    path: str
    text: str
    data: dict

    def line_of(self, key: str) -> int | None:
        """Best-effort line of the first occurrence of a quoted key."""
        needle = f'"{key}"'
        for i, line in enumerate(self.text.splitlines(), start=1):
            if needle in line:
                return i
        return None

    def error(self, key: str | None, message: str) -> ConfigError:
        line = self.line_of(key) if key else None
        anchor = f"{self.path}:{line}" if line else self.path
        return ConfigError(f"{anchor}: {message}")


def load_doc(path) -> ConfigDoc:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return ConfigDoc(path=str(path), text=text, data=data)


def config_sha256(doc: ConfigDoc) -> str:
    return hashlib.sha256(doc.text.encode()).hexdigest()


def _check_keys(doc: ConfigDoc, obj: dict, allowed: set[str], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise doc.error(key, f'unknown key "{key}" in {where} '
                                 f"(allowed: {', '.join(sorted(allowed))})")


def _section(doc: ConfigDoc, name: str, required: bool = True) -> dict:
    sec = doc.data.get(name)
    if sec is None:
        if required:
            raise doc.error(None, f'missing required section "{name}"')
        return {}
    if not isinstance(sec, dict):
        raise doc.error(name, f'section "{name}" must be an object')
    return sec


def _num(doc: ConfigDoc, obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise doc.error(None, f'missing "{key}" in {where}')
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise doc.error(key, f'"{key}" in {where} must be a finite number')
    return float(v)


def _vec(doc: ConfigDoc, obj: dict, key: str, length, where: str, default=None):
    if key not in obj:
        if default is None:
            raise doc.error(None, f'missing "{key}" in {where}')
        return np.asarray(default, dtype=float)
    v = obj[key]
    lengths = (length,) if isinstance(length, int) else tuple(length)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return np.full(lengths[0], float(v))
    if not isinstance(v, list) or len(v) not in lengths or \
            any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        want = " or ".join(str(n) for n in lengths)
        raise doc.error(key, f'"{key}" in {where} must be a list of {want} numbers')
    return np.asarray(v, dtype=float)


def _state(doc: ConfigDoc, obj, key: str, where: str) -> VehicleState:
    v = _vec(doc, {key: obj}, key, (4, 8), where)
    if v.size == 4:
        v = np.concatenate([v, np.zeros(4)])
    try:
        return VehicleState.from_array(v)
    except ValueError as exc:
        raise doc.error(key, f"bad state in {where}: {exc}") from exc


_VEHICLE_KEYS = {"m11", "m22", "m33", "m44", "Xu", "Yv", "Zw", "Nr",
                 "Xuu", "Yvv", "Zww", "Nrr", "thruster_matrix", "dt",
                 "heave_bias"}


def parse_vehicle(doc: ConfigDoc) -> VehicleParams:
    sec = _section(doc, "vehicle", required=False)
    _check_keys(doc, sec, _VEHICLE_KEYS, 'section "vehicle"')
    base = default_params()
    if "thruster_matrix" in sec:
        t = sec["thruster_matrix"]
        if (not isinstance(t, list) or len(t) != 4
                or any(not isinstance(r, list) or len(r) != 4 for r in t)):
            raise doc.error("thruster_matrix", "thruster_matrix must be a 4x4 array")
        matrix = np.asarray(t, dtype=float)
    else:
        matrix = base.thruster_matrix
    kwargs = {}
    for name in ("m11", "m22", "m33", "m44", "Xu", "Yv", "Zw", "Nr",
                 "Xuu", "Yvv", "Zww", "Nrr", "dt", "heave_bias"):
        kwargs[name] = _num(doc, sec, name, 'section "vehicle"',
                            default=getattr(base, name))
    try:
        return VehicleParams(thruster_matrix=matrix, **kwargs)
    except ValueError as exc:
        raise doc.error("vehicle", f"invalid vehicle parameters: {exc}") from exc


_WORKSPACE_KEYS = {"box_min", "box_max", "r_bar", "obstacles", "velocity_bounds"}
_OBSTACLE_KEYS = {"center", "radius", "pillar"}
_BOUNDS_KEYS = {"v_planar_max", "w_max", "r_max", "planar_norm"}


def parse_workspace(doc: ConfigDoc) -> tuple[Workspace, VelocityBounds]:
    sec = _section(doc, "workspace")
    _check_keys(doc, sec, _WORKSPACE_KEYS, 'section "workspace"')
    box_min = _vec(doc, sec, "box_min", 3, 'section "workspace"')
    box_max = _vec(doc, sec, "box_max", 3, 'section "workspace"')
    r_bar = _num(doc, sec, "r_bar", 'section "workspace"', default=0.3)
    obstacles = []
    raw_obs = sec.get("obstacles", [])
    if not isinstance(raw_obs, list):
        raise doc.error("obstacles", "obstacles must be a list")
    for i, entry in enumerate(raw_obs):
        where = f"workspace.obstacles[{i}]"
        if not isinstance(entry, dict):
            raise doc.error("obstacles", f"{where} must be an object")
        _check_keys(doc, entry, _OBSTACLE_KEYS, where)
        center = _vec(doc, entry, "center", (2, 3), where)
        planar_given = center.size == 2
        if planar_given:
            # Planar center: a pillar axis; park the sphere center mid-depth.
            center = np.append(center, 0.5 * (box_min[2] + box_max[2]))
        pillar = entry.get("pillar", planar_given)
        if not isinstance(pillar, bool):
            raise doc.error("pillar", f"{where}.pillar must be true or false")
        obstacles.append(Sphere(center=center,
                                radius=_num(doc, entry, "radius", where),
                                pillar=pillar))
    bounds_sec = sec.get("velocity_bounds", {})
    if not isinstance(bounds_sec, dict):
        raise doc.error("velocity_bounds", "velocity_bounds must be an object")
    _check_keys(doc, bounds_sec, _BOUNDS_KEYS, "workspace.velocity_bounds")
    planar_norm = bounds_sec.get("planar_norm", False)
    if not isinstance(planar_norm, bool):
        raise doc.error("planar_norm", "planar_norm must be true or false")
    try:
        bounds = VelocityBounds(
            v_planar_max=_num(doc, bounds_sec, "v_planar_max",
                              "workspace.velocity_bounds", default=0.5),
            w_max=_num(doc, bounds_sec, "w_max", "workspace.velocity_bounds",
                       default=0.25),
            r_max=_num(doc, bounds_sec, "r_max", "workspace.velocity_bounds",
                       default=1.0),
            planar_norm=planar_norm,
        )
    except ValueError as exc:
        raise doc.error("velocity_bounds", str(exc)) from exc
    return Workspace(box_min=box_min, box_max=box_max,
                     obstacles=tuple(obstacles), r_bar=r_bar), bounds


_FIELD_KEYS = {
    "uniform": {"type", "velocity"},
    "jet": {"type", "origin", "direction", "peak_speed", "core_length",
            "spread_rate"},
    "grid": {"type", "path"},
}


def parse_field(doc: ConfigDoc, entry: dict, where: str,
                base_dir: Path) -> CurrentField:
    if not isinstance(entry, dict) or "type" not in entry:
        raise doc.error(None, f'{where} must be an object with a "type"')
    kind = entry["type"]
    if kind not in _FIELD_KEYS:
        raise doc.error("type", f'{where}: unknown current type "{kind}" '
                                f"(expected uniform, jet or grid)")
    _check_keys(doc, entry, _FIELD_KEYS[kind], where)
    try:
        if kind == "uniform":
            return UniformCurrent(_vec(doc, entry, "velocity", 3, where))
        if kind == "jet":
            return JetCurrent(
                origin=_vec(doc, entry, "origin", 3, where),
                direction=_vec(doc, entry, "direction", 3, where),
                peak_speed=_num(doc, entry, "peak_speed", where),
                core_length=_num(doc, entry, "core_length", where, default=0.5),
                spread_rate=_num(doc, entry, "spread_rate", where, default=0.12),
            )
        path = entry.get("path")
        if not isinstance(path, str):
            raise doc.error("path", f'{where}: grid "path" must be a string')
        return CurrentGrid.load(base_dir / path)
    except ConfigError:
        raise
    except ValueError as exc:
        raise doc.error("type", f"{where}: {exc}") from exc


_CURRENTS_KEYS = {"controller", "truth"}


def parse_currents(doc: ConfigDoc, base_dir: Path) -> tuple[CurrentField, CurrentField]:
    sec = _section(doc, "currents", required=False)
    _check_keys(doc, sec, _CURRENTS_KEYS, 'section "currents"')
    still = {"type": "uniform", "velocity": [0.0, 0.0, 0.0]}
    controller = parse_field(doc, sec.get("controller", still),
                             "currents.controller", base_dir)
    truth = parse_field(doc, sec.get("truth", sec.get("controller", still)),
                        "currents.truth", base_dir)
    return controller, truth


_OCP_KEYS = {"horizon", "q_weights", "r_weights", "p_weights", "thrust_max",
             "terminal_radius", "terminal_yaw", "constraint_margin"}


def parse_ocp(doc: ConfigDoc) -> OcpSettings:
    sec = _section(doc, "ocp", required=False)
    _check_keys(doc, sec, _OCP_KEYS, 'section "ocp"')
    horizon = sec.get("horizon", 20)
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise doc.error("horizon", "horizon must be a positive integer")
    defaults = OcpSettings()
    try:
        return OcpSettings(
            horizon=horizon,
            q_weights=_vec(doc, sec, "q_weights", 8, 'section "ocp"',
                           default=defaults.q_weights),
            r_weights=_vec(doc, sec, "r_weights", 4, 'section "ocp"',
                           default=defaults.r_weights),
            p_weights=_vec(doc, sec, "p_weights", 8, 'section "ocp"',
                           default=defaults.p_weights),
            thrust_max=_vec(doc, sec, "thrust_max", 4, 'section "ocp"',
                            default=defaults.thrust_max),
            terminal=TerminalRegion(
                radius=_num(doc, sec, "terminal_radius", 'section "ocp"', default=0.3),
                yaw_halfwidth=_num(doc, sec, "terminal_yaw", 'section "ocp"', default=0.15),
            ),
            constraint_margin=_num(doc, sec, "constraint_margin",
                                   'section "ocp"', default=0.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise doc.error("ocp", f"invalid ocp settings: {exc}") from exc


_SOLVER_KEYS = {"max_outer_iters", "max_inner_iters", "grad_tol",
                "penalty_init", "penalty_growth", "constraint_tol",
                "armijo", "shrink", "step_init"}


def parse_solver(doc: ConfigDoc) -> SolverConfig:
    sec = _section(doc, "solver", required=False)
    _check_keys(doc, sec, _SOLVER_KEYS, 'section "solver"')
    defaults = SolverConfig()
    kwargs = {}
    for name in ("max_outer_iters", "max_inner_iters"):
        v = sec.get(name, getattr(defaults, name))
        if isinstance(v, bool) or not isinstance(v, int):
            raise doc.error(name, f"{name} must be an integer")
        kwargs[name] = v
    for name in ("grad_tol", "penalty_init", "penalty_growth",
                 "constraint_tol", "armijo", "shrink", "step_init"):
        kwargs[name] = _num(doc, sec, name, 'section "solver"',
                            default=getattr(defaults, name))
    return SolverConfig(**kwargs)


_MISSION_KEYS = {"initial_state", "waypoints", "laps", "tick",
                 "truth_substeps", "max_ticks", "max_failed_solves"}


def parse_mission(doc: ConfigDoc) -> MissionConfig:
    """Parse a full mission document into a runnable configuration."""
    _check_keys(doc, doc.data, {"vehicle", "workspace", "currents", "ocp",
                                "solver", "mission"}, "config")
    base_dir = Path(doc.path).parent
    params = parse_vehicle(doc)
    ws, bounds = parse_workspace(doc)
    controller_field, truth_field = parse_currents(doc, base_dir)
    ocp_settings = parse_ocp(doc)
    solver_cfg = parse_solver(doc)

    sec = _section(doc, "mission")
    _check_keys(doc, sec, _MISSION_KEYS, 'section "mission"')
    if "initial_state" not in sec:
        raise doc.error(None, 'missing "initial_state" in section "mission"')
    if "waypoints" not in sec or not isinstance(sec["waypoints"], list) \
            or not sec["waypoints"]:
        raise doc.error(None, 'section "mission" needs a nonempty "waypoints" list')
    initial = _state(doc, sec["initial_state"], "initial_state", 'section "mission"')
    waypoints = tuple(_state(doc, w, "waypoints", f"mission.waypoints[{i}]")
                      for i, w in enumerate(sec["waypoints"]))
    laps = sec.get("laps", 1)
    substeps = sec.get("truth_substeps", 1)
    max_ticks = sec.get("max_ticks", 3000)
    max_failed = sec.get("max_failed_solves", 10)
    for name, v in (("laps", laps), ("truth_substeps", substeps),
                    ("max_ticks", max_ticks), ("max_failed_solves", max_failed)):
        if isinstance(v, bool) or not isinstance(v, int):
            raise doc.error(name, f"{name} must be an integer")
    try:
        return MissionConfig(
            waypoints=waypoints, initial_state=initial, params=params,
            workspace=ws, bounds=bounds, controller_field=controller_field,
            truth_field=truth_field, ocp=ocp_settings, solver=solver_cfg,
            laps=laps, tick=_num(doc, sec, "tick", 'section "mission"', default=0.1),
            truth_substeps=substeps, max_ticks=max_ticks,
            max_failed_solves=max_failed,
        )
    except ConfigError as exc:
        raise doc.error("mission", str(exc)) from exc
