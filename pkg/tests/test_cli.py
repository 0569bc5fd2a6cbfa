import json

import numpy as np
import pytest

from rovmpc.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, main


def quick_mission(tmp_path, **tweaks):
    """A mission config small enough for CLI round-trip tests."""
    cfg = {
        "workspace": {
            "box_min": [-10, -10, -10],
            "box_max": [10, 10, 10],
            "r_bar": 0.3,
            "obstacles": [],
            "velocity_bounds": {"v_planar_max": 0.5, "w_max": 0.25, "r_max": 1.0},
        },
        "currents": {"controller": {"type": "uniform", "velocity": [0.05, 0, 0]}},
        "ocp": {"horizon": 8, "constraint_margin": 0.01,
                "q_weights": [8, 8, 8, 6, 0.5, 0.5, 0.5, 0.2],
                "r_weights": [0.005, 0.005, 0.005, 0.005],
                "p_weights": [40, 40, 40, 30, 2, 2, 2, 0.6]},
        "solver": {"penalty_init": 100.0, "grad_tol": 0.01},
        "mission": {
            "initial_state": [-0.6, 0, 0, 0],
            "waypoints": [[0.6, 0, 0, 0]],
            "tick": 0.1,
            "truth_substeps": 2,
            "max_ticks": 300,
        },
    }
    for key, value in tweaks.items():
        section, _, name = key.partition(".")
        if name:
            cfg[section][name] = value
        else:
            cfg[section] = value
    path = tmp_path / "mission.json"
    path.write_text(json.dumps(cfg, indent=2) + "\n")
    return path


class TestSimulate:
    def test_writes_all_artifacts(self, tmp_path):
        cfg = quick_mission(tmp_path)
        out = tmp_path / "out"
        rc = main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "7"])
        assert rc == EXIT_OK
        expected = {
            "mission.csv", "summary.json",
            "fig_trajectory_xy.csv", "fig_trajectory_xy_shapes.csv",
            "fig_depth_yaw.csv", "fig_planar_speed.csv",
            "fig_heave_yaw_rates.csv", "fig_thrusts.csv",
            "fig_trajectory_xy.png", "fig_depth_yaw.png",
            "fig_planar_speed.png", "fig_heave_yaw_rates.png",
            "fig_thrusts.png",
        }
        assert expected <= {p.name for p in out.iterdir()}
        summary = json.loads((out / "summary.json").read_text())
        assert summary["outcome"] == "success"
        assert summary["seed"] == 7
        assert len(summary["config_sha256"]) == 64

    def test_artifacts_embed_hash_and_seed(self, tmp_path):
        cfg = quick_mission(tmp_path)
        out = tmp_path / "out"
        main(["simulate", "--config", str(cfg), "--out", str(out), "--seed", "3"])
        head = (out / "mission.csv").read_text().splitlines()[:2]
        assert head[0].startswith("# config_sha256=")
        assert head[1] == "# seed=3"

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = quick_mission(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["simulate", "--config", str(cfg), "--out", str(out1), "--seed", "5"])
        main(["simulate", "--config", str(cfg), "--out", str(out2), "--seed", "5"])
        for name in ("mission.csv", "summary.json", "fig_planar_speed.csv",
                     "fig_thrusts.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_config_error_exit(self, tmp_path, capsys):
        cfg = quick_mission(tmp_path, **{"workspace.obstacles": [
            {"center": [0.0, 0.0, 0.0], "radius": 0.2},
            {"center": [0.5, 0.0, 0.0], "radius": 0.2},
        ]})
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "obstacles[0]/obstacles[1]" in err

    def test_timeout_exit_code(self, tmp_path):
        cfg = quick_mission(tmp_path, **{"mission.max_ticks": 3})
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert rc == 5

    def test_mission_csv_parses_back(self, tmp_path):
        import io
        cfg = quick_mission(tmp_path)
        out = tmp_path / "out"
        main(["simulate", "--config", str(cfg), "--out", str(out)])
        body = "\n".join(line for line in
                         (out / "mission.csv").read_text().splitlines()
                         if not line.startswith("#"))
        rows = np.genfromtxt(io.StringIO(body), delimiter=",", names=True)
        assert rows["time"][0] == pytest.approx(0.1)
        assert np.all(np.diff(rows["time"]) > 0)
        assert np.all(np.diff(rows["energy"]) >= 0)
        # Energy recomputation from the persisted file.
        tau_sq = (rows["tau_po"] ** 2 + rows["tau_s"] ** 2
                  + rows["tau_ve"] ** 2 + rows["tau_l"] ** 2)
        assert rows["energy"][-1] == pytest.approx(float(tau_sq.sum() * 0.1))


class TestSolve:
    def test_solve_dump(self, tmp_path):
        cfg = quick_mission(tmp_path)
        out = tmp_path / "out"
        rc = main(["solve", "--config", str(cfg), "--out", str(out)])
        assert rc == EXIT_OK
        dump = json.loads((out / "solve.json").read_text())
        assert dump["converged"] is True
        assert len(dump["sequence"]) == 8
        assert len(dump["predicted"]) == 9
        assert all(abs(t) <= 12.0 for row in dump["sequence"] for t in row)
        assert dump["cost"] >= 0

    def test_solve_at_target_near_zero(self, tmp_path):
        cfg = quick_mission(tmp_path, **{"mission.initial_state": [0.6, 0, 0, 0],
                                         "currents": {}})
        out = tmp_path / "out"
        main(["solve", "--config", str(cfg), "--out", str(out)])
        dump = json.loads((out / "solve.json").read_text())
        assert max(abs(t) for row in dump["sequence"] for t in row) <= 1e-2
        assert dump["cost"] <= 1e-4


class TestGradcheck:
    def test_default_passes(self, capsys):
        rc = main(["gradcheck", "--seed", "0"])
        assert rc == EXIT_OK
        assert "PASS" in capsys.readouterr().out

    def test_injected_bug_fails(self, capsys):
        rc = main(["gradcheck", "--seed", "0", "--perturb-jacobian", "1e-3"])
        assert rc == EXIT_CHECK_FAILED
        assert "FAIL" in capsys.readouterr().out

    def test_deterministic_report(self, capsys):
        main(["gradcheck", "--seed", "11"])
        out1 = capsys.readouterr().out
        main(["gradcheck", "--seed", "11"])
        out2 = capsys.readouterr().out
        assert out1 == out2


class TestValidateConfig:
    def test_valid_config(self, tmp_path, capsys):
        cfg = quick_mission(tmp_path)
        assert main(["validate-config", "--config", str(cfg)]) == EXIT_OK
        assert "config OK" in capsys.readouterr().out

    def test_tank_fixture_valid(self, configs_dir, capsys):
        rc = main(["validate-config", "--config",
                   str(configs_dir / "tank_mission.json")])
        assert rc == EXIT_OK

    def test_violating_pair_named_with_margin(self, tmp_path, capsys):
        cfg = quick_mission(tmp_path, **{"workspace.obstacles": [
            {"center": [0.0, 0.0, 0.0], "radius": 0.16},
            {"center": [0.9, 0.0, 0.0], "radius": 0.16},
        ]})
        rc = main(["validate-config", "--config", str(cfg)])
        assert rc == EXIT_CONFIG
        out = capsys.readouterr().out
        assert "obstacles[0]/obstacles[1]" in out
        assert "0.02" in out

    def test_unknown_key_reported(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"workspace": {"box_min": [0,0,0], "box_max": [1,1,1],'
                        ' "rbar": 0.3}, "mission": {"initial_state": [0.5,0.5,0.5,0],'
                        ' "waypoints": [[0.5,0.5,0.5,0]]}}\n')
        rc = main(["validate-config", "--config", str(path)])
        assert rc == EXIT_CONFIG
        assert "rbar" in capsys.readouterr().err
