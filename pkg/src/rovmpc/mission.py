"""Closed-loop receding-horizon mission execution.

Each control tick: solve the finite-horizon problem from the current truth
state toward the active waypoint (warm-started by the shifted previous
solution), apply the first thrust command to the truth model for one tick,
and log everything. The truth model may integrate with finer sub-steps and
a different current field than the controller believes in, which is the
knob for studying model mismatch.

A waypoint counts as reached when the *truth* state enters its terminal
region; the waypoint list then advances, cycling for the configured number
of laps. The run ends with one of four outcomes: ``success`` (all laps
completed), ``constraint_breach`` (truth state violated a state constraint
beyond tolerance), ``solver_failure`` (too many consecutive non-converged
solves) or ``timeout`` (tick budget exhausted).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .currents import CurrentField, sample_at
from .dynamics import ThrustCommand, VehicleParams, VehicleState, step
from .errors import ConfigError
from .ocp import (ControlSequence, OcpSettings, TerminalRegion, build_problem,
                  within_terminal)
from .solver import (OcpSolution, SolverConfig, shift_multipliers, solve,
                     warm_start_shift)
from .workspace import (VelocityBounds, Workspace, clearance,
                        obstacle_clearance, state_constraint_residuals,
                        validate)

OUTCOME_SUCCESS = "success"
OUTCOME_BREACH = "constraint_breach"
OUTCOME_SOLVER = "solver_failure"
OUTCOME_TIMEOUT = "timeout"


@dataclass(frozen=True)
class MissionConfig:
    waypoints: tuple[VehicleState, ...]
    initial_state: VehicleState
    params: VehicleParams
    workspace: Workspace
    bounds: VelocityBounds
    controller_field: CurrentField
    truth_field: CurrentField
    ocp: OcpSettings = field(default_factory=OcpSettings)
    solver: SolverConfig = field(default_factory=SolverConfig)
    laps: int = 1
    tick: float = 0.1            # control period [s]
    truth_substeps: int = 1      # truth integration sub-steps per tick
    max_ticks: int = 3000
    max_failed_solves: int = 10  # consecutive non-converged solves tolerated

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if len(self.waypoints) < 1:
            raise ConfigError("mission needs at least one waypoint")
        if self.laps < 1:
            raise ConfigError("laps must be at least 1")
        if not self.tick > 0:
            raise ConfigError("tick must be positive")
        if self.truth_substeps < 1:
            raise ConfigError("truth_substeps must be at least 1")
        if self.max_ticks < 1 or self.max_failed_solves < 1:
            raise ConfigError("tick and solver-failure budgets must be positive")


@dataclass(frozen=True)
class TickRecord:
    """State of the world at the end of one control tick."""

    time: float                 # s, end of tick
    state: VehicleState         # truth state after the tick
    applied: ThrustCommand      # first command of this tick's solution
    min_residual: float         # worst truth-state constraint margin
    obstacle_clearance: float   # truth clearance to obstacles only
    solver_cost: float
    solver_iterations: int
    solver_violation: float
    solver_converged: bool
    waypoint: int               # active target index during the tick
    lap: int                    # 0-based lap of that target
    energy: float               # cumulative sum ||tau||^2 * tick


@dataclass(frozen=True)
class LegRecord:
    """One waypoint arrival."""

    lap: int
    waypoint: int
    time: float  # s, when the terminal region was entered


@dataclass
class MissionLog:
    config: MissionConfig
    outcome: str
    records: list[TickRecord]
    legs: list[LegRecord]
    initial_state: VehicleState
    solutions: list[OcpSolution]  # per-tick diagnostics, not persisted

    @property
    def energy(self) -> float:
        return self.records[-1].energy if self.records else 0.0

    @property
    def duration(self) -> float:
        return self.records[-1].time if self.records else 0.0


def arrival_check(state: VehicleState, waypoint: VehicleState,
                  region: TerminalRegion) -> bool:
    """Terminal-region membership of the truth state."""
    return within_terminal(state, waypoint, region)


def energy_proxy(log: MissionLog) -> float:
    """Thrust-energy surrogate sum ||tau||^2 * tick over the whole log [N^2 s]."""
    tick = log.config.tick
    total = 0.0
    for rec in log.records:
        tau = rec.applied.as_array()
        total += float(tau @ tau) * tick
    return total


def _truth_step(state: VehicleState, cmd: ThrustCommand, cfg: MissionConfig,
                sub_params: VehicleParams) -> VehicleState:
    for _ in range(cfg.truth_substeps):
        cur = sample_at(cfg.truth_field, state.position, state.psi)
        state = step(state, cmd, cur, sub_params)
    return state


def run(cfg: MissionConfig) -> MissionLog:
    """Execute the mission and return the full log.

    Raises ConfigError on an invalid workspace or an initial state outside
    free space; every runtime failure is a recorded outcome, never an
    exception.
    """
    violations = validate(cfg.workspace)
    if violations:
        detail = "; ".join(f"{v.subject}: {v.message}" for v in violations)
        raise ConfigError(f"invalid workspace: {detail}")
    if clearance(cfg.workspace, cfg.initial_state.position) < 0.0:
        raise ConfigError("initial state is not in free space")

    controller_params = dataclasses.replace(cfg.params, dt=cfg.tick)
    sub_params = dataclasses.replace(cfg.params, dt=cfg.tick / cfg.truth_substeps)

    state = cfg.initial_state
    warm: ControlSequence | None = None
    warm_lam = None
    records: list[TickRecord] = []
    legs: list[LegRecord] = []
    solutions: list[OcpSolution] = []
    energy = 0.0
    wp_idx = 0
    lap = 0
    fail_streak = 0
    outcome = OUTCOME_TIMEOUT
    t = 0.0

    for _tick in range(cfg.max_ticks):
        # Waypoint sequencing on the truth state before planning.
        arrived = True
        while arrived and lap < cfg.laps:
            arrived = arrival_check(state, cfg.waypoints[wp_idx], cfg.ocp.terminal)
            if arrived:
                legs.append(LegRecord(lap=lap, waypoint=wp_idx, time=t))
                wp_idx += 1
                if wp_idx == len(cfg.waypoints):
                    wp_idx = 0
                    lap += 1
                # Multipliers describe the old target's active set; drop them.
                warm_lam = None
        if lap >= cfg.laps:
            outcome = OUTCOME_SUCCESS
            break

        prob = build_problem(cfg.ocp, state, cfg.waypoints[wp_idx],
                             cfg.workspace, cfg.bounds, cfg.controller_field,
                             controller_params)
        sol = solve(prob, warm, cfg.solver, warm_multipliers=warm_lam)
        solutions.append(sol)
        if sol.converged:
            fail_streak = 0
        else:
            fail_streak += 1
            if fail_streak >= cfg.max_failed_solves:
                outcome = OUTCOME_SOLVER
                break
        warm = warm_start_shift(sol.seq)
        warm_lam = shift_multipliers(sol.multipliers)
        applied = sol.seq.taus[0]

        state = _truth_step(state, applied, cfg, sub_params)
        t += cfg.tick
        tau = applied.as_array()
        energy += float(tau @ tau) * cfg.tick

        residuals = state_constraint_residuals(cfg.workspace, cfg.bounds, state)
        min_res = float(residuals.min())
        records.append(TickRecord(
            time=t, state=state, applied=applied,
            min_residual=min_res,
            obstacle_clearance=obstacle_clearance(cfg.workspace, state.position),
            solver_cost=sol.cost, solver_iterations=sol.iterations,
            solver_violation=sol.max_violation, solver_converged=sol.converged,
            waypoint=wp_idx, lap=lap, energy=energy,
        ))
        if min_res < -cfg.solver.constraint_tol:
            outcome = OUTCOME_BREACH
            break

    return MissionLog(config=cfg, outcome=outcome, records=records, legs=legs,
                      initial_state=cfg.initial_state, solutions=solutions)
