"""Thrust-sequence optimizer for the finite-horizon problem.

Input (thrust box) constraints are handled exactly by projection; state
constraints by an augmented-Lagrangian outer loop whose inner problem is
solved with projected gradient descent, a Barzilai-Borwein initial step and
monotone Armijo backtracking. The state constraints enter the merit in
their smooth decomposition (per-face margins and squared obstacle
distances, see :func:`rovmpc.workspace.constraint_terms`), which keeps the
penalty differentiable at obstacle centers.

The whole solve is deterministic: identical problem, warm start and
configuration yield bit-identical solutions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import ocp
from .dynamics import VehicleState
from .errors import ConfigError
from .ocp import ControlSequence, OcpProblem
from .workspace import _terms_raw


@dataclass(frozen=True)
class SolverConfig:
    max_outer_iters: int = 8      # augmented-Lagrangian rounds
    max_inner_iters: int = 80     # projected-gradient steps per round
    grad_tol: float = 1e-3        # inf-norm of the projected gradient step
    penalty_init: float = 20.0
    penalty_growth: float = 5.0
    constraint_tol: float = 1e-3  # max allowed state-constraint violation
    armijo: float = 1e-4          # sufficient-decrease constant
    shrink: float = 0.5           # backtracking factor
    step_init: float = 0.2        # first trial step before BB kicks in

    def __post_init__(self):
        if not (self.max_outer_iters >= 1 and self.max_inner_iters >= 1):
            raise ConfigError("iteration caps must be at least 1")
        if not (self.grad_tol > 0 and self.penalty_init > 0
                and self.constraint_tol > 0 and self.step_init > 0):
            raise ConfigError("solver tolerances must be positive")
        if not self.penalty_growth > 1.0:
            raise ConfigError("penalty growth must exceed 1")
        if not (0.0 < self.shrink < 1.0 and 0.0 < self.armijo < 1.0):
            raise ConfigError("line search parameters out of range")


@dataclass(frozen=True)
class OcpSolution:
    seq: ControlSequence
    predicted: tuple              # N+1 predicted states under seq
    cost: float                   # tracking objective (no penalty terms)
    max_violation: float          # worst state-constraint violation, >= 0
    iterations: int               # accepted inner steps, all rounds
    converged: bool
    solve_time: float             # s, wall clock (diagnostic only)
    multipliers: np.ndarray = None  # final constraint multipliers (N-1, terms)


def project_box(seq: ControlSequence, thrust_max) -> ControlSequence:
    """Clamp each thruster command into its box; idempotent."""
    tb = np.asarray(thrust_max, dtype=float).reshape(4)
    return ControlSequence.from_array(np.clip(seq.as_array(), -tb, tb))


def warm_start_shift(prev: ControlSequence) -> ControlSequence:
    """Receding-horizon shift: drop the first command, repeat the last."""
    taus = prev.taus
    return ControlSequence(taus=taus[1:] + (taus[-1],))


def shift_multipliers(lam: np.ndarray) -> np.ndarray:
    """Receding-horizon shift of per-step constraint multipliers.

    Row i of ``lam`` belongs to predicted step i+1; at the next tick that
    step moves one slot earlier, so rows shift up and the last repeats,
    mirroring :func:`warm_start_shift`.
    """
    if lam is None or lam.shape[0] < 2:
        return lam
    return np.vstack([lam[1:], lam[-1:]])


def _merit(prob: OcpProblem, u: np.ndarray, lam: np.ndarray, mu: float):
    """Augmented-Lagrangian value at ``u``.

    Returns (phi, cost, states, g) where g stacks the smooth constraint
    terms of the interior states, one row per state.
    """
    states = ocp._rollout_raw(prob, u)
    base = ocp._cost_raw(prob, u, states)
    g = _terms_of_states(prob, states, with_jac=False)
    if g is None:
        return base, base, states, None
    # rho(s) with s = -g: quadratic once lambda + mu * s goes active.
    active = np.maximum(0.0, lam - mu * g)
    phi = base + float(((active ** 2).sum() - (lam ** 2).sum()) / (2.0 * mu))
    return phi, base, states, g


def _terms_of_states(prob: OcpProblem, states, with_jac: bool):
    n = prob.horizon
    if n < 2:
        return None
    ws, bounds, margin = prob.workspace, prob.bounds, prob.constraint_margin
    rows = []
    jacs = [] if with_jac else None
    for j in range(1, n):
        g, jac = _terms_raw(ws, bounds, states[j], margin, with_jac)
        rows.append(g)
        if with_jac:
            jacs.append(jac)
    if with_jac:
        return np.array(rows), jacs
    return np.array(rows)


def _merit_gradient(prob: OcpProblem, u: np.ndarray, states,
                    lam: np.ndarray, mu: float) -> np.ndarray:
    """Gradient of the AL merit via one backward pass."""
    extra = None
    terms = _terms_of_states(prob, states, with_jac=True)
    if terms is not None:
        g_rows, jacs = terms
        weights = np.maximum(0.0, lam - mu * g_rows)  # d rho / d s, s = -g
        extra = [None] * prob.horizon
        for j in range(1, prob.horizon):
            extra[j] = -(jacs[j - 1].T @ weights[j - 1])
    return ocp._gradient_raw(prob, u, states, extra_state_grads=extra)


def _violation_of_states(prob: OcpProblem, states) -> float:
    res = ocp._residuals_of_raw(prob, states)
    if res.size == 0:
        return 0.0
    return float(max(0.0, -res.min()))


def solve(prob: OcpProblem, warm: ControlSequence | None = None,
          cfg: SolverConfig = SolverConfig(),
          warm_multipliers: np.ndarray | None = None) -> OcpSolution:
    """Minimize the tracking objective over the thrust box.

    The returned sequence always lies inside the box exactly. ``converged``
    is True when the projected-gradient stationarity measure fell below
    ``grad_tol`` and the worst state-constraint violation is at most
    ``constraint_tol``; otherwise the best iterate found is returned with
    the violation reported as-is.

    ``warm_multipliers`` optionally seeds the augmented-Lagrangian
    multipliers (shape (N-1, 9 + obstacles)); the receding-horizon loop
    passes the shifted multipliers of the previous tick, which lets
    steady-state solves converge in a handful of iterations.
    """
    t_start = time.perf_counter()
    n = prob.horizon
    if warm is not None and len(warm) != n:
        raise ConfigError(f"warm start length {len(warm)} != horizon {n}")
    tb = prob.thrust_max
    u = np.clip(warm.as_array() if warm is not None else np.zeros((n, 4)), -tb, tb)

    n_terms = 9 + len(prob.workspace.obstacles)
    if warm_multipliers is not None:
        if warm_multipliers.shape != (max(0, n - 1), n_terms):
            raise ConfigError(
                f"warm multipliers shape {warm_multipliers.shape} != "
                f"{(max(0, n - 1), n_terms)}")
        lam = np.maximum(0.0, warm_multipliers.astype(float))
    else:
        lam = np.zeros((max(0, n - 1), n_terms))
    mu = cfg.penalty_init
    total_accepted = 0
    stationary = False
    prev_worst = math.inf

    for _outer in range(cfg.max_outer_iters):
        phi, _, states, _ = _merit(prob, u, lam, mu)
        grad = _merit_gradient(prob, u, states, lam, mu)
        alpha = cfg.step_init / max(1.0, float(np.abs(grad).max()))
        stationary = False
        for _inner in range(cfg.max_inner_iters):
            # Unit-step projected-gradient displacement: the stationarity
            # measure (zero exactly at a KKT point of the box problem).
            if float(np.abs(np.clip(u - grad, -tb, tb) - u).max()) <= cfg.grad_tol:
                stationary = True
                break
            # Armijo backtracking along the projection arc.
            accepted = False
            while alpha >= 1e-14:
                trial = np.clip(u - alpha * grad, -tb, tb)
                d = trial - u
                if not d.any():
                    break
                slope = float((grad * d).sum())  # <= 0 by projection
                phi_trial, _, states_trial, _ = _merit(prob, trial, lam, mu)
                if phi_trial <= phi + cfg.armijo * slope:
                    accepted = True
                    break
                alpha *= cfg.shrink
            if not accepted:
                break  # step length underflow; return best iterate so far
            assert phi_trial <= phi + 1e-12 * max(1.0, abs(phi)), \
                "merit increased on an accepted step"
            grad_new = _merit_gradient(prob, trial, states_trial, lam, mu)
            # Barzilai-Borwein step for the next iteration, safeguarded.
            du = (trial - u).ravel()
            dg = (grad_new - grad).ravel()
            denom = float(du @ dg)
            if denom > 1e-16:
                alpha = min(max(float(du @ du) / denom, 1e-8), 1e4)
            else:
                alpha = cfg.step_init / max(1.0, float(np.abs(grad_new).max()))
            u, phi, grad, states = trial, phi_trial, grad_new, states_trial
            total_accepted += 1

        if lam.size == 0:
            break  # no state constraints (N = 1): single unconstrained round
        g_rows = _terms_of_states(prob, states, with_jac=False)
        worst = float(max(0.0, -(g_rows.min())))
        lam = np.maximum(0.0, lam - mu * g_rows)
        if stationary and _violation_of_states(prob, states) <= cfg.constraint_tol:
            break
        # Grow the penalty unless the violation shrank by 4x on its own.
        if worst > cfg.constraint_tol and \
                (math.isinf(prev_worst) or worst > 0.25 * prev_worst):
            mu = min(mu * cfg.penalty_growth, 1e8)
        prev_worst = worst

    final_states = ocp._rollout_raw(prob, u)
    violation = _violation_of_states(prob, final_states)
    return OcpSolution(
        seq=ControlSequence.from_array(u),
        predicted=tuple(VehicleState.from_array(a) for a in final_states),
        cost=ocp._cost_raw(prob, u, final_states),
        max_violation=violation,
        iterations=total_accepted,
        converged=bool(stationary and violation <= cfg.constraint_tol),
        solve_time=time.perf_counter() - t_start,
        multipliers=lam,
    )
