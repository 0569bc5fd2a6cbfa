import json
import math

import numpy as np
import pytest

from rovmpc import ConfigError
from rovmpc.config import config_sha256, load_doc, parse_mission
from rovmpc.currents import CurrentGrid, JetCurrent, UniformCurrent


def minimal_config(**overrides):
    cfg = {
        "workspace": {
            "box_min": [-5, -5, -5],
            "box_max": [5, 5, 5],
            "r_bar": 0.3,
            "velocity_bounds": {"v_planar_max": 0.5, "w_max": 0.25, "r_max": 1.0},
        },
        "mission": {
            "initial_state": [0, 0, 0, 0],
            "waypoints": [[1, 0, 0, 0]],
        },
    }
    cfg.update(overrides)
    return cfg


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2) + "\n")
    return path


class TestParsing:
    def test_minimal_config_fills_defaults(self, tmp_path):
        mcfg = parse_mission(load_doc(write(tmp_path, minimal_config())))
        assert mcfg.ocp.horizon == 20
        assert mcfg.params.m11 == 20.0
        assert mcfg.tick == 0.1
        assert isinstance(mcfg.controller_field, UniformCurrent)
        np.testing.assert_array_equal(mcfg.controller_field.velocity, [0, 0, 0])

    def test_tank_fixture_parses(self, configs_dir):
        mcfg = parse_mission(load_doc(configs_dir / "tank_mission.json"))
        assert len(mcfg.waypoints) == 2
        assert mcfg.laps == 3
        assert mcfg.waypoints[1].psi == pytest.approx(math.pi)
        assert len(mcfg.workspace.obstacles) == 2
        assert mcfg.workspace.obstacles[0].pillar
        # Planar centers land mid-depth.
        assert mcfg.workspace.obstacles[0].center[2] == pytest.approx(0.6)
        assert mcfg.ocp.constraint_margin == 0.02

    def test_grid_field_config(self, configs_dir):
        mcfg = parse_mission(load_doc(configs_dir / "tank_mission_gridflow.json"))
        assert isinstance(mcfg.truth_field, CurrentGrid)
        assert isinstance(mcfg.controller_field, UniformCurrent)
        assert mcfg.truth_field.max_speed <= 0.2

    def test_jet_field_config(self, tmp_path):
        cfg = minimal_config(currents={
            "controller": {"type": "jet", "origin": [0, 0, 0],
                           "direction": [1, 0, 0], "peak_speed": 0.3}})
        mcfg = parse_mission(load_doc(write(tmp_path, cfg)))
        assert isinstance(mcfg.controller_field, JetCurrent)
        # Truth defaults to the controller's field spec.
        assert isinstance(mcfg.truth_field, JetCurrent)

    def test_eight_entry_states(self, tmp_path):
        cfg = minimal_config()
        cfg["mission"]["initial_state"] = [0, 0, 0, 0, 0.1, 0, 0, 0]
        mcfg = parse_mission(load_doc(write(tmp_path, cfg)))
        assert mcfg.initial_state.u_r == 0.1

    def test_scalar_thrust_max_broadcast(self, tmp_path):
        cfg = minimal_config(ocp={"thrust_max": 9.0})
        mcfg = parse_mission(load_doc(write(tmp_path, cfg)))
        np.testing.assert_array_equal(mcfg.ocp.thrust_max, [9, 9, 9, 9])


class TestStrictness:
    def test_unknown_top_level_key(self, tmp_path):
        cfg = minimal_config(extra_section={})
        with pytest.raises(ConfigError, match='unknown key "extra_section"'):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_unknown_key_is_line_anchored(self, tmp_path):
        cfg = minimal_config()
        cfg["workspace"]["velcity_bounds"] = {}
        path = write(tmp_path, cfg)
        line = next(i for i, txt in enumerate(path.read_text().splitlines(), 1)
                    if "velcity_bounds" in txt)
        with pytest.raises(ConfigError, match=rf"cfg\.json:{line}.*velcity_bounds"):
            parse_mission(load_doc(path))

    def test_unknown_solver_key(self, tmp_path):
        cfg = minimal_config(solver={"grad_toll": 1e-3})
        with pytest.raises(ConfigError, match="grad_toll"):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_unknown_obstacle_key(self, tmp_path):
        cfg = minimal_config()
        cfg["workspace"]["obstacles"] = [{"center": [0, 0, 0], "radius": 0.2,
                                          "height": 1.0}]
        with pytest.raises(ConfigError, match="height"):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_json_syntax_error_carries_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "workspace": {,}\n}\n')
        with pytest.raises(ConfigError, match=r"bad\.json:2:"):
            load_doc(path)

    def test_missing_mission_section(self, tmp_path):
        cfg = minimal_config()
        del cfg["mission"]
        with pytest.raises(ConfigError, match='missing required section "mission"'):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_bad_number_type(self, tmp_path):
        cfg = minimal_config()
        cfg["workspace"]["r_bar"] = "wide"
        with pytest.raises(ConfigError, match="r_bar"):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_bool_not_accepted_as_number(self, tmp_path):
        cfg = minimal_config()
        cfg["workspace"]["r_bar"] = True
        with pytest.raises(ConfigError, match="r_bar"):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_out_of_range_vehicle_param(self, tmp_path):
        cfg = minimal_config(vehicle={"m11": -3.0})
        with pytest.raises(ConfigError, match="vehicle"):
            parse_mission(load_doc(write(tmp_path, cfg)))

    def test_wrong_waypoint_arity(self, tmp_path):
        cfg = minimal_config()
        cfg["mission"]["waypoints"] = [[1, 0, 0]]
        with pytest.raises(ConfigError, match="4 or 8"):
            parse_mission(load_doc(write(tmp_path, cfg)))


class TestHash:
    def test_hash_is_of_raw_bytes(self, tmp_path):
        import hashlib
        path = write(tmp_path, minimal_config())
        doc = load_doc(path)
        assert config_sha256(doc) == hashlib.sha256(path.read_bytes()).hexdigest()

    def test_hash_changes_with_content(self, tmp_path):
        doc1 = load_doc(write(tmp_path, minimal_config(), "a.json"))
        cfg = minimal_config()
        cfg["mission"]["laps"] = 2
        doc2 = load_doc(write(tmp_path, cfg, "b.json"))
        assert config_sha256(doc1) != config_sha256(doc2)
