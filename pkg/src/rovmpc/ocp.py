"""Finite-horizon optimal control problem over a thrust sequence.

A problem fixes the measured state, a target state, diagonal quadratic
weights on the tracking error and on thrust, per-thruster force bounds, the
workspace and velocity constraints, and the current model the controller
believes in. Prediction is a forward rollout of the vehicle model with the
current sampled at each predicted position; the objective is

    sum_{j=0}^{N-1} e_j' Q e_j + tau_j' R tau_j   +   e_N' P e_N

with e_j the error to the target (yaw error wrapped to (-pi, pi]). The
gradient w.r.t. the whole thrust sequence is computed by one backward
adjoint pass through the step Jacobians, so its cost is a small multiple of
one rollout.

State constraints apply to the interior predicted states j = 1 .. N-1;
the final state is shaped by the terminal penalty instead of a hard
membership constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .currents import CurrentField
from .dynamics import (ThrustCommand, VehicleParams, VehicleState,
                       _jac_state_raw, _step_raw, wrap_angle)
from .errors import ConfigError
from .workspace import VelocityBounds, Workspace, _residuals_raw


@dataclass(frozen=True)
class TerminalRegion:
    """Arrival region around a waypoint: position ball plus yaw window."""

    radius: float = 0.3         # m
    yaw_halfwidth: float = 0.15  # rad

    def __post_init__(self):
        if not (self.radius > 0 and self.yaw_halfwidth > 0):
            raise ConfigError("terminal region dimensions must be positive")


@dataclass(frozen=True)
class ControlSequence:
    """Thrust commands over the horizon."""

    taus: tuple[ThrustCommand, ...]

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(self.taus))

    def __len__(self) -> int:
        return len(self.taus)

    def __iter__(self):
        return iter(self.taus)

    @classmethod
    def zeros(cls, n: int) -> "ControlSequence":
        return cls(taus=tuple(ThrustCommand() for _ in range(n)))

    @classmethod
    def from_array(cls, a) -> "ControlSequence":
        a = np.asarray(a, dtype=float)
        return cls(taus=tuple(ThrustCommand.from_array(row) for row in a.reshape(-1, 4)))

    def as_array(self) -> np.ndarray:
        return np.array([t.as_array() for t in self.taus]).reshape(len(self.taus), 4)


@dataclass(frozen=True)
class OcpSettings:
    """Problem shape shared by every solve of a mission."""

    horizon: int = 20
    q_weights: np.ndarray = None   # 8 running error weights
    r_weights: np.ndarray = None   # 4 thrust weights
    p_weights: np.ndarray = None   # 8 terminal error weights
    thrust_max: np.ndarray = None  # 4 per-thruster bounds [N]
    terminal: TerminalRegion = field(default_factory=TerminalRegion)
    constraint_margin: float = 0.0  # tightening applied inside the OCP

    def __post_init__(self):
        def _vec(v, n, default):
            if v is None:
                v = default
            v = np.asarray(v, dtype=float).reshape(n).copy()
            v.setflags(write=False)
            return v
        object.__setattr__(self, "q_weights", _vec(
            self.q_weights, 8, [10.0, 10.0, 10.0, 4.0, 1.0, 1.0, 1.0, 0.3]))
        object.__setattr__(self, "r_weights", _vec(self.r_weights, 4, [0.02] * 4))
        object.__setattr__(self, "p_weights", _vec(
            self.p_weights, 8, [50.0, 50.0, 50.0, 20.0, 5.0, 5.0, 5.0, 1.5]))
        object.__setattr__(self, "thrust_max", _vec(self.thrust_max, 4, [12.0] * 4))


@dataclass(frozen=True)
class OcpProblem:
    x0: VehicleState
    target: VehicleState
    horizon: int
    q_weights: np.ndarray
    r_weights: np.ndarray
    p_weights: np.ndarray
    thrust_max: np.ndarray
    workspace: Workspace
    bounds: VelocityBounds
    field: CurrentField
    params: VehicleParams
    terminal: TerminalRegion = field(default_factory=TerminalRegion)
    constraint_margin: float = 0.0

    def __post_init__(self):
        if not (isinstance(self.horizon, int) and self.horizon >= 1):
            raise ConfigError(f"horizon must be a positive integer, got {self.horizon}")
        for name, n in (("q_weights", 8), ("r_weights", 4), ("p_weights", 8)):
            v = np.asarray(getattr(self, name), dtype=float).reshape(n).copy()
            if not np.all(v > 0.0):
                raise ConfigError(f"{name} must be strictly positive")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        tb = np.asarray(self.thrust_max, dtype=float).reshape(4).copy()
        # Zero entries disable a thruster (degenerate box); at least one
        # channel must be actuated.
        if np.any(tb < 0.0) or not np.any(tb > 0.0):
            raise ConfigError("thrust bounds must be nonnegative with some channel > 0")
        tb.setflags(write=False)
        object.__setattr__(self, "thrust_max", tb)
        if self.constraint_margin < 0.0:
            raise ConfigError("constraint margin must be nonnegative")
        object.__setattr__(self, "_target_arr", self.target.as_array())
        self._target_arr.setflags(write=False)


def build_problem(settings: OcpSettings, x0: VehicleState, target: VehicleState,
                  ws: Workspace, bounds: VelocityBounds, field: CurrentField,
                  params: VehicleParams) -> OcpProblem:
    return OcpProblem(
        x0=x0, target=target, horizon=settings.horizon,
        q_weights=settings.q_weights, r_weights=settings.r_weights,
        p_weights=settings.p_weights, thrust_max=settings.thrust_max,
        workspace=ws, bounds=bounds, field=field, params=params,
        terminal=settings.terminal, constraint_margin=settings.constraint_margin,
    )


def error_state(s: VehicleState, target: VehicleState) -> np.ndarray:
    """Tracking error with the yaw component wrapped to (-pi, pi]."""
    e = s.as_array() - target.as_array()
    e[3] = wrap_angle(e[3])
    return e


def _rollout_raw(prob: OcpProblem, taus: np.ndarray) -> list[np.ndarray]:
    """Rollout of the raw 8-state arrays (optimizer hot path)."""
    x0 = prob.x0
    x = (x0.x, x0.y, x0.z, x0.psi, x0.u_r, x0.v_r, x0.w_r, x0.r_r)
    states = [np.array(x)]
    field, params = prob.field, prob.params
    for j in range(prob.horizon):
        cur = field.sample((x[0], x[1], x[2]))
        x = _step_raw(x, taus[j], cur, params)
        states.append(np.array(x))
    return states


def _cost_raw(prob: OcpProblem, taus: np.ndarray,
              states: list[np.ndarray]) -> float:
    q, r, p = prob.q_weights, prob.r_weights, prob.p_weights
    target = prob._target_arr
    total = 0.0
    for j in range(prob.horizon):
        e = states[j] - target
        e[3] = wrap_angle(e[3])
        tau = taus[j]
        total += float(e @ (q * e)) + float(tau @ (r * tau))
    e = states[prob.horizon] - target
    e[3] = wrap_angle(e[3])
    return total + float(e @ (p * e))


def _gradient_raw(prob: OcpProblem, taus: np.ndarray, states: list[np.ndarray],
                  extra_state_grads=None) -> np.ndarray:
    """Backward adjoint pass over a raw rollout.

    ``extra_state_grads`` optionally supplies, per interior step j, an extra
    gradient w.r.t. the j-th state; the solver folds its constraint penalty
    into the pass through this hook. The field sample of each step is held
    fixed, exactly like the step Jacobians.
    """
    n = prob.horizon
    q, r, p = prob.q_weights, prob.r_weights, prob.p_weights
    params = prob.params
    target = prob._target_arr
    b_t = params._jac_thrust.T
    grad = np.empty((n, 4))
    e = states[n] - target
    e[3] = wrap_angle(e[3])
    lam = 2.0 * p * e
    for j in range(n - 1, -1, -1):
        s = states[j]
        grad[j] = 2.0 * r * taus[j] + b_t @ lam
        e = s - target
        e[3] = wrap_angle(e[3])
        lam = _jac_state_raw(s, params).T @ lam + 2.0 * q * e
        if extra_state_grads is not None and j >= 1:
            lam += extra_state_grads[j]
    return grad


def _residuals_of_raw(prob: OcpProblem, states: list[np.ndarray]) -> np.ndarray:
    """Margin-shifted min-form residuals of the interior raw states."""
    rows = [_residuals_raw(prob.workspace, prob.bounds, states[j])
            - prob.constraint_margin
            for j in range(1, prob.horizon)]
    if not rows:
        return np.empty(0)
    return np.concatenate(rows)


def rollout(prob: OcpProblem, seq: ControlSequence) -> list[VehicleState]:
    """Predicted states [x0, x1, ..., xN] under the controller's current model."""
    if len(seq) != prob.horizon:
        raise ConfigError(f"sequence length {len(seq)} != horizon {prob.horizon}")
    raw = _rollout_raw(prob, seq.as_array())
    return [prob.x0] + [VehicleState.from_array(a) for a in raw[1:]]


def cost(prob: OcpProblem, seq: ControlSequence) -> float:
    if len(seq) != prob.horizon:
        raise ConfigError(f"sequence length {len(seq)} != horizon {prob.horizon}")
    taus = seq.as_array()
    return _cost_raw(prob, taus, _rollout_raw(prob, taus))


def cost_gradient(prob: OcpProblem, seq: ControlSequence) -> np.ndarray:
    """Gradient of :func:`cost` w.r.t. every thrust entry, shape (N, 4)."""
    if len(seq) != prob.horizon:
        raise ConfigError(f"sequence length {len(seq)} != horizon {prob.horizon}")
    taus = seq.as_array()
    return _gradient_raw(prob, taus, _rollout_raw(prob, taus))


def constraint_residuals(prob: OcpProblem, seq: ControlSequence) -> np.ndarray:
    """Stacked state-constraint residuals of the interior predicted states.

    Four entries per step for j = 1 .. N-1, shifted by the problem's
    constraint margin; feasible iff all >= 0. Empty for N = 1.
    """
    if len(seq) != prob.horizon:
        raise ConfigError(f"sequence length {len(seq)} != horizon {prob.horizon}")
    return _residuals_of_raw(prob, _rollout_raw(prob, seq.as_array()))


def within_terminal(s: VehicleState, target: VehicleState,
                    region: TerminalRegion) -> bool:
    """Closed-region membership: position ball AND yaw window."""
    pos_err = float(np.linalg.norm(s.position - target.position))
    yaw_err = abs(wrap_angle(s.psi - target.psi))
    return pos_err <= region.radius and yaw_err <= region.yaw_halfwidth


def terminal_set_check(prob: OcpProblem, s: VehicleState) -> bool:
    """True iff ``s`` lies in the terminal region around the problem target."""
    return within_terminal(s, prob.target, prob.terminal)
