"""Waypoint NMPC and closed-loop simulation for a 4-DoF underwater vehicle.

The package is organized bottom-up: ``dynamics`` (vehicle model),
``workspace`` (geometry and state constraints), ``currents`` (ambient flow
models), ``ocp`` (finite-horizon problem), ``solver`` (projected-gradient /
augmented-Lagrangian optimizer), ``mission`` (receding-horizon loop),
``config``/``report``/``plots``/``cli`` (front end and artifacts).
"""

from .currents import (CurrentGrid, CurrentSample, JetCurrent, UniformCurrent,
                       sample_at, to_body, to_inertial)
from .dynamics import (BodyForces, ThrustCommand, VehicleParams, VehicleState,
                       allocate, coriolis_power, default_params, drift, step,
                       step_jacobians, wrap_angle)
from .errors import ConfigError
from .mission import (LegRecord, MissionConfig, MissionLog, TickRecord,
                      arrival_check, energy_proxy, run)
from .ocp import (ControlSequence, OcpProblem, OcpSettings, TerminalRegion,
                  build_problem, cost, cost_gradient, constraint_residuals,
                  error_state, rollout, terminal_set_check)
from .solver import (OcpSolution, SolverConfig, project_box, solve,
                     warm_start_shift)
from .workspace import (Sphere, VelocityBounds, Violation, Workspace,
                        clearance, obstacle_clearance,
                        state_constraint_residuals, validate)

__version__ = "0.1.0"
