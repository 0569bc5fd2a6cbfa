import itertools

import numpy as np
import pytest

from rovmpc import (ConfigError, ControlSequence, OcpProblem, Sphere,
                    ThrustCommand, UniformCurrent, VehicleState,
                    VelocityBounds, Workspace, default_params, project_box,
                    solve, warm_start_shift)
from rovmpc.solver import SolverConfig

from reference_model import params_as_dict, ref_cost


def open_water():
    return Workspace(box_min=[-50, -50, -50], box_max=[50, 50, 50], r_bar=0.3)


def make_problem(x0, target, n, thrust_max, q=None, r=None, p=None,
                 ws=None, bounds=None, current=(0.0, 0.0, 0.0)):
    return OcpProblem(
        x0=x0, target=target, horizon=n,
        q_weights=np.ones(8) if q is None else np.asarray(q, dtype=float),
        r_weights=np.full(4, 0.05) if r is None else np.asarray(r, dtype=float),
        p_weights=np.ones(8) if p is None else np.asarray(p, dtype=float),
        thrust_max=np.asarray(thrust_max, dtype=float),
        workspace=open_water() if ws is None else ws,
        bounds=VelocityBounds(10.0, 10.0, 10.0) if bounds is None else bounds,
        field=UniformCurrent(current),
        params=default_params(),
    )


def grid_oracle_cost(prob, levels=5):
    """Exhaustive search over a per-channel thrust grid, via the reference
    model (independent of the library rollout)."""
    par = params_as_dict(prob.params)
    t_a = np.array(prob.params.thruster_matrix)
    cur = prob.field.velocity
    target = prob.target.as_array()
    channel_levels = []
    for i in range(4):
        bound = float(prob.thrust_max[i])
        if bound == 0.0:
            channel_levels.append([0.0])
        else:
            channel_levels.append(list(np.linspace(-bound, bound, levels)))
    per_step = [np.array(c) for c in itertools.product(*channel_levels)]
    best = np.inf
    for combo in itertools.product(per_step, repeat=prob.horizon):
        taus = np.array(combo)
        c = ref_cost(prob.x0.as_array(), taus, target, par, t_a, cur,
                     prob.params.dt, prob.q_weights, prob.r_weights,
                     prob.p_weights)
        best = min(best, c)
    return best


class TestProjectBox:
    def test_inside_unchanged(self):
        seq = ControlSequence.from_array([[1.0, -2.0, 3.0, 0.0]])
        out = project_box(seq, [12, 12, 12, 12])
        assert out.as_array().tolist() == [[1.0, -2.0, 3.0, 0.0]]

    def test_clamps_to_bound(self):
        seq = ControlSequence.from_array([[15.0, -20.0, 5.0, 0.0]])
        out = project_box(seq, [12, 12, 12, 12])
        assert out.taus[0].tau_po == 12.0
        assert out.taus[0].tau_s == -12.0
        assert out.taus[0].tau_ve == 5.0

    def test_idempotent_and_nonexpansive(self):
        rng = np.random.default_rng(61)
        tb = [12, 12, 12, 12]
        for _ in range(50):
            a = rng.uniform(-30, 30, (3, 4))
            b = rng.uniform(-30, 30, (3, 4))
            pa = project_box(ControlSequence.from_array(a), tb)
            pb = project_box(ControlSequence.from_array(b), tb)
            np.testing.assert_array_equal(
                project_box(pa, tb).as_array(), pa.as_array())
            assert (np.abs(pa.as_array() - pb.as_array()).max()
                    <= np.abs(a - b).max() + 1e-15)


class TestWarmStartShift:
    def test_shift_pattern(self):
        a, b, c = (ThrustCommand(1, 0, 0, 0), ThrustCommand(2, 0, 0, 0),
                   ThrustCommand(3, 0, 0, 0))
        out = warm_start_shift(ControlSequence(taus=(a, b, c)))
        assert out.taus == (b, c, c)

    def test_zero_sequence_unchanged(self):
        seq = ControlSequence.zeros(4)
        np.testing.assert_array_equal(warm_start_shift(seq).as_array(),
                                      seq.as_array())

    def test_index_property(self):
        rng = np.random.default_rng(62)
        for _ in range(20):
            n = int(rng.integers(2, 12))
            arr = rng.uniform(-5, 5, (n, 4))
            out = warm_start_shift(ControlSequence.from_array(arr)).as_array()
            np.testing.assert_array_equal(out[:-1], arr[1:])
            np.testing.assert_array_equal(out[-1], arr[-1])


class TestSolve:
    def test_at_target_returns_near_zero(self):
        prob = make_problem(VehicleState(), VehicleState(), n=5,
                            thrust_max=[12] * 4)
        sol = solve(prob)
        assert sol.converged
        assert np.abs(sol.seq.as_array()).max() <= 1e-3
        assert sol.cost <= 1e-6

    def test_respects_thrust_box_bit_exactly(self):
        prob = make_problem(VehicleState(), VehicleState(x=30.0, y=10.0), n=8,
                            thrust_max=[12] * 4,
                            q=[5, 5, 5, 2, 0.5, 0.5, 0.5, 0.2],
                            r=[0.001] * 4, p=[20, 20, 20, 8, 1, 1, 1, 0.4])
        sol = solve(prob)
        taus = sol.seq.as_array()
        assert np.all(np.abs(taus) <= 12.0)
        # A target this far pushes the surge channels onto the bound.
        assert np.abs(taus).max() == 12.0

    def test_deterministic(self):
        rng = np.random.default_rng(63)
        x0 = VehicleState.from_array(rng.uniform(-0.5, 0.5, 8))
        prob = make_problem(x0, VehicleState(x=1.0), n=6, thrust_max=[12] * 4)
        warm = ControlSequence.from_array(rng.uniform(-3, 3, (6, 4)))
        s1 = solve(prob, warm)
        s2 = solve(prob, warm)
        np.testing.assert_array_equal(s1.seq.as_array(), s2.seq.as_array())
        assert s1.cost == s2.cost
        assert s1.iterations == s2.iterations
        assert s1.max_violation == s2.max_violation

    def test_invalid_problem_rejected_before_iteration(self):
        prob = make_problem(VehicleState(), VehicleState(), n=4,
                            thrust_max=[12] * 4)
        with pytest.raises(ConfigError):
            solve(prob, warm=ControlSequence.zeros(3))

    def test_beats_grid_oracle_on_tiny_instances(self):
        # Planar two-thruster instances: vertical/lateral channels disabled
        # so the exhaustive 5-level grid stays enumerable (5^4 points).
        rng = np.random.default_rng(64)
        cfg = SolverConfig(max_outer_iters=3, max_inner_iters=400,
                           grad_tol=1e-7, step_init=0.5)
        for _ in range(10):
            x0 = VehicleState.from_array(np.concatenate([
                rng.uniform(-0.5, 0.5, 4), rng.uniform(-0.2, 0.2, 4)]))
            target = VehicleState.from_array(np.concatenate([
                rng.uniform(-1, 1, 3), [rng.uniform(-1.5, 1.5)], np.zeros(4)]))
            prob = make_problem(x0, target, n=2, thrust_max=[8.0, 8.0, 0.0, 0.0],
                                q=rng.uniform(0.5, 3, 8),
                                r=rng.uniform(0.01, 0.1, 4),
                                p=rng.uniform(0.5, 3, 8))
            sol = solve(prob, None, cfg)
            oracle = grid_oracle_cost(prob)
            assert sol.seq.as_array()[:, 2:].max() == 0.0
            assert sol.cost <= oracle + 1e-6

    def test_velocity_constraint_enforced(self):
        # Far target with a tight speed bound: unconstrained optimum would
        # sprint, the solver must keep predicted speeds within tolerance.
        bounds = VelocityBounds(0.4, 0.25, 1.0)
        prob = make_problem(VehicleState(), VehicleState(x=5.0), n=10,
                            thrust_max=[12] * 4,
                            q=[5, 5, 5, 2, 0.2, 0.2, 0.2, 0.1],
                            r=[0.01] * 4, p=[10, 10, 10, 4, 0.5, 0.5, 0.5, 0.2],
                            bounds=bounds)
        sol = solve(prob, None, SolverConfig(max_outer_iters=8))
        assert sol.max_violation <= 1e-3
        for s in sol.predicted[1:-1]:
            assert abs(s.u_r + s.v_r) <= 0.4 + 2e-3

    def test_obstacle_constraint_enforced(self):
        ws = Workspace(box_min=[-50, -50, -50], box_max=[50, 50, 50], r_bar=0.3,
                       obstacles=(Sphere(center=[1.0, 0.0, 0.0], radius=0.2),))
        prob = make_problem(VehicleState(), VehicleState(x=2.0), n=12,
                            thrust_max=[12] * 4,
                            q=[5, 5, 5, 2, 0.2, 0.2, 0.2, 0.1], r=[0.01] * 4,
                            p=[20, 20, 20, 8, 1, 1, 1, 0.4], ws=ws)
        sol = solve(prob, None, SolverConfig(max_outer_iters=8))
        assert sol.max_violation <= 1e-3

    def test_infeasible_start_degrades_gracefully(self):
        # Vehicle parked inside the inflated obstacle: no sequence can clear
        # step 1, the solver must report failure with an honest violation.
        ws = Workspace(box_min=[-50, -50, -50], box_max=[50, 50, 50], r_bar=0.3,
                       obstacles=(Sphere(center=[0.0, 0.0, 0.0], radius=2.0),))
        prob = make_problem(VehicleState(x=0.2), VehicleState(x=10.0), n=4,
                            thrust_max=[12] * 4, ws=ws)
        sol = solve(prob, None, SolverConfig(max_outer_iters=3))
        assert not sol.converged
        assert sol.max_violation > 1e-3
        assert np.all(np.isfinite(sol.seq.as_array()))

    def test_solution_reports_prediction_consistent_with_seq(self):
        from rovmpc import rollout
        prob = make_problem(VehicleState(), VehicleState(x=1.0), n=5,
                            thrust_max=[12] * 4)
        sol = solve(prob)
        redo = rollout(prob, sol.seq)
        for a, b in zip(sol.predicted, redo):
            np.testing.assert_array_equal(a.as_array(), b.as_array())
