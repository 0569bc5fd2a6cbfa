"""Command-line front end.

Subcommands:

* ``simulate``        run a closed-loop mission, write the log CSV, the JSON
                      summary, per-figure plot data and rendered PNG figures.
* ``solve``           solve a single finite-horizon problem (initial state
                      toward the first waypoint) and dump the solution JSON.
* ``gradcheck``       compare the analytic step Jacobians and objective
                      gradient against central finite differences on seeded
                      random fixtures.
* ``validate-config`` parse a config and run the workspace validator.

Exit codes: 0 success, 1 check failure (gradcheck tolerance breach),
2 configuration error, 3 constraint breach, 4 solver failure, 5 tick budget
exhausted. Set ROVMPC_LOG=debug|info|warning for stderr verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import mission, ocp, plots, report, solver
from .dynamics import (ThrustCommand, VehicleState, default_params, step,
                       step_jacobians)
from .currents import CurrentSample, UniformCurrent
from .errors import ConfigError
from .workspace import validate

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BREACH = 3
EXIT_SOLVER = 4
EXIT_TIMEOUT = 5

_OUTCOME_EXIT = {
    mission.OUTCOME_SUCCESS: EXIT_OK,
    mission.OUTCOME_BREACH: EXIT_BREACH,
    mission.OUTCOME_SOLVER: EXIT_SOLVER,
    mission.OUTCOME_TIMEOUT: EXIT_TIMEOUT,
}

log = logging.getLogger("rovmpc")


def _setup_logging() -> None:
    level = os.environ.get("ROVMPC_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _meta(doc: cfgmod.ConfigDoc, seed: int) -> dict:
    return {"config_sha256": cfgmod.config_sha256(doc), "seed": seed}


def cmd_simulate(args) -> int:
    doc = cfgmod.load_doc(args.config)
    mcfg = cfgmod.parse_mission(doc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _meta(doc, args.seed)

    mlog = mission.run(mcfg)
    report.write_mission_csv(mlog, out / "mission.csv", meta)
    summary = report.write_summary_json(mlog, out / "summary.json", meta)
    data_files = report.write_figure_data(mlog, out, meta)
    figure_files = plots.render_all(mlog, out)
    log.info("wrote %s", ", ".join(["mission.csv", "summary.json"]
                                   + data_files + figure_files))
    print(f"outcome: {mlog.outcome}  ticks: {len(mlog.records)}  "
          f"energy: {mlog.energy:.3f}  "
          f"min_residual: {summary['min_residual']}")
    return _OUTCOME_EXIT[mlog.outcome]


def cmd_solve(args) -> int:
    doc = cfgmod.load_doc(args.config)
    mcfg = cfgmod.parse_mission(doc)
    prob = ocp.build_problem(mcfg.ocp, mcfg.initial_state, mcfg.waypoints[0],
                             mcfg.workspace, mcfg.bounds, mcfg.controller_field,
                             mcfg.params)
    sol = solver.solve(prob, None, mcfg.solver)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump = {
        "sequence": sol.seq.as_array().tolist(),
        "predicted": [s.as_array().tolist() for s in sol.predicted],
        "cost": sol.cost,
        "max_violation": sol.max_violation,
        "iterations": sol.iterations,
        "converged": sol.converged,
        **_meta(doc, args.seed),
    }
    (out / "solve.json").write_text(json.dumps(dump, indent=2, sort_keys=True) + "\n")
    print(f"cost: {sol.cost:.6g}  violation: {sol.max_violation:.3g}  "
          f"iterations: {sol.iterations}  converged: {sol.converged}")
    return EXIT_OK if sol.converged else EXIT_SOLVER


def _gradcheck_dynamics(rng, params, inject: float) -> float:
    """Worst relative error of the analytic step Jacobians vs central
    differences over random states away from drag kinks."""
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        sv = rng.uniform(-1.0, 1.0, 8)
        sv[4:] = np.sign(sv[4:]) * (0.05 + np.abs(sv[4:]))  # keep |v| off 0
        state = VehicleState.from_array(sv)
        tau = ThrustCommand.from_array(rng.uniform(-8.0, 8.0, 4))
        cur = CurrentSample.zero()
        a_an, b_an = step_jacobians(state, tau, cur, params)
        a_an = a_an.copy()
        a_an[4, 4] += inject
        scale = max(1.0, float(np.abs(a_an).max()))

        def f_state(v):
            return step(VehicleState.from_array(v), tau, cur, params).as_array()

        def f_tau(v):
            return step(state, ThrustCommand.from_array(v), cur, params).as_array()

        a_fd = _central_jacobian(f_state, state.as_array(), h, wrap_row=3)
        b_fd = _central_jacobian(f_tau, tau.as_array(), h)
        worst = max(worst,
                    float(np.abs(a_an - a_fd).max()) / scale,
                    float(np.abs(b_an - b_fd).max()) / scale)
    return worst


def _central_jacobian(f, x0, h, wrap_row=None) -> np.ndarray:
    import math
    cols = []
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        diff = f(xp) - f(xm)
        if wrap_row is not None:
            # Yaw output lives on a circle; difference through the wrap.
            diff[wrap_row] = math.remainder(diff[wrap_row], 2.0 * math.pi)
        cols.append(diff / (2.0 * h))
    return np.array(cols).T


def _gradcheck_ocp(rng, params, inject: float) -> float:
    """Worst relative error of the objective gradient vs central differences
    over random small problems with uniform currents."""
    from .workspace import VelocityBounds, Workspace
    h = 1e-6
    worst = 0.0
    ws = Workspace(box_min=[-50.0, -50.0, -50.0], box_max=[50.0, 50.0, 50.0],
                   obstacles=(), r_bar=0.3)
    bounds = VelocityBounds(5.0, 5.0, 5.0)
    for _ in range(10):
        n = int(rng.integers(2, 8))
        x0 = VehicleState.from_array(np.concatenate([
            rng.uniform(-2.0, 2.0, 4),
            np.sign(rng.uniform(-1, 1, 4)) * rng.uniform(0.05, 0.4, 4)]))
        target = VehicleState.from_array(np.concatenate([
            rng.uniform(-2.0, 2.0, 3), [rng.uniform(-2.0, 2.0)], np.zeros(4)]))
        prob = ocp.OcpProblem(
            x0=x0, target=target, horizon=n,
            q_weights=rng.uniform(0.5, 5.0, 8), r_weights=rng.uniform(0.01, 0.5, 4),
            p_weights=rng.uniform(0.5, 5.0, 8), thrust_max=np.full(4, 12.0),
            workspace=ws, bounds=bounds,
            field=UniformCurrent(rng.uniform(-0.1, 0.1, 3)), params=params)
        seq_arr = rng.uniform(-6.0, 6.0, (n, 4))
        seq = ocp.ControlSequence.from_array(seq_arr)
        states = ocp.rollout(prob, seq)
        if any(min(abs(s.u_r), abs(s.v_r), abs(s.w_r), abs(s.r_r)) < 1e-4
               for s in states):
            continue  # too close to a |v| v kink for finite differences
        grad = ocp.cost_gradient(prob, seq) + inject

        def f_flat(v):
            return ocp.cost(prob, ocp.ControlSequence.from_array(v.reshape(n, 4)))

        flat = seq_arr.ravel()
        fd = np.empty(flat.size)
        for i in range(flat.size):
            vp, vm = flat.copy(), flat.copy()
            vp[i] += h
            vm[i] -= h
            fd[i] = (f_flat(vp) - f_flat(vm)) / (2.0 * h)
        scale = max(1.0, float(np.abs(fd).max()))
        worst = max(worst, float(np.abs(grad.ravel() - fd).max()) / scale)
    return worst


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    params = default_params()
    err_dyn = _gradcheck_dynamics(rng, params, args.perturb_jacobian)
    err_ocp = _gradcheck_ocp(rng, params, args.perturb_jacobian)
    tol = 1e-5
    ok = err_dyn <= tol and err_ocp <= tol
    print(f"step jacobians max relative error: {err_dyn:.3e}")
    print(f"objective gradient max relative error: {err_ocp:.3e}")
    print(f"gradcheck: {'PASS' if ok else 'FAIL'} (tolerance {tol:g})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_validate_config(args) -> int:
    doc = cfgmod.load_doc(args.config)
    mcfg = cfgmod.parse_mission(doc)
    violations = validate(mcfg.workspace)
    if violations:
        for v in violations:
            margin = f" (margin {v.margin:.6g} m)" if v.margin is not None else ""
            print(f"violation [{v.code}] {v.subject}: {v.message}{margin}")
        return EXIT_CONFIG
    print(f"config OK: {args.config} (sha256 {cfgmod.config_sha256(doc)[:12]})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rovmpc",
        description="Waypoint NMPC and closed-loop simulator for a 4-DoF "
                    "underwater vehicle in ocean currents.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--config", required=True, help="mission config JSON")
        if needs_out:
            p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded in artifacts (and used by gradcheck)")

    p_sim = sub.add_parser("simulate", help="run a closed-loop mission")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_solve = sub.add_parser("solve", help="solve one finite-horizon problem")
    add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_grad = sub.add_parser("gradcheck",
                            help="finite-difference check of analytic derivatives")
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--perturb-jacobian", type=float, default=0.0,
                        help="offset injected into the analytic derivatives "
                             "(negative control; nonzero must FAIL)")
    p_grad.set_defaults(func=cmd_gradcheck)

    p_val = sub.add_parser("validate-config", help="parse and validate a config")
    add_common(p_val, needs_out=False)
    p_val.set_defaults(func=cmd_validate_config)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
