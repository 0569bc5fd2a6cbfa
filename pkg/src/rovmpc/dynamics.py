"""4-DoF underwater vehicle model.

State x = [x, y, z, psi, u_r, v_r, w_r, r_r]: inertial position and yaw plus
body-frame velocities *relative to the water* (surge, sway, heave, yaw rate).
Roll and pitch are decoupled and held at zero, the usual assumption for a
small ROV that is symmetric and passively stable in those axes.

The discrete model is one forward-Euler step of

    position/yaw rates:  rotate relative velocity to the inertial frame and
                         add the inertial current (pure advection),
    velocity rates:      (Coriolis + linear drag + quadratic drag
                          + allocated thrust) / effective mass,

with the yaw angle re-wrapped to (-pi, pi] afterwards. Effective masses
include added mass; drag coefficients are negative by convention so the drag
force is coeff * v (linear) and coeff * |v| * v (quadratic). Thruster forces
map to body forces through a 4x4 allocation matrix.

All operations are pure functions of immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .currents import CurrentSample

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(angle, TWO_PI)
    return r + TWO_PI if r <= -math.pi else r


@dataclass(frozen=True)
class VehicleState:
    """Pose in the inertial frame plus body-frame relative velocities."""

    x: float = 0.0    # m
    y: float = 0.0    # m
    z: float = 0.0    # m
    psi: float = 0.0  # rad, wrapped to (-pi, pi] on construction
    u_r: float = 0.0  # m/s, surge relative to water
    v_r: float = 0.0  # m/s, sway
    w_r: float = 0.0  # m/s, heave
    r_r: float = 0.0  # rad/s, yaw rate

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.psi,
                self.u_r, self.v_r, self.w_r, self.r_r)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite vehicle state {vals}")
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @classmethod
    def from_array(cls, a) -> "VehicleState":
        a = np.asarray(a, dtype=float).reshape(8)
        return cls(*[float(v) for v in a])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.psi,
                         self.u_r, self.v_r, self.w_r, self.r_r])

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class ThrustCommand:
    """Per-thruster forces [N]: port, starboard, vertical, lateral."""

    tau_po: float = 0.0
    tau_s: float = 0.0
    tau_ve: float = 0.0
    tau_l: float = 0.0

    def __post_init__(self):
        vals = (self.tau_po, self.tau_s, self.tau_ve, self.tau_l)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite thrust command {vals}")

    @classmethod
    def from_array(cls, a) -> "ThrustCommand":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(*[float(v) for v in a])

    def as_array(self) -> np.ndarray:
        return np.array([self.tau_po, self.tau_s, self.tau_ve, self.tau_l])


@dataclass(frozen=True)
class BodyForces:
    """Generalized forces in the body frame: X, Y, Z [N] and yaw torque N [N m]."""

    X: float
    Y: float
    Z: float
    N: float

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z, self.N])


@dataclass(frozen=True)
class VehicleParams:
    """Hydrodynamic parameters of the 4-DoF model.

    m11..m44 are the effective masses/inertia including added mass
    (kg, kg m^2); all drag coefficients are strictly negative; the 4x4
    thruster allocation matrix maps [tau_po, tau_s, tau_ve, tau_l] to
    [X, Y, Z, N] and must be invertible; dt is the sampling period [s].
    heave_bias is an optional constant heave force [N] (residual buoyancy
    knob for robustness studies; zero for a neutrally buoyant vehicle).
    """

    m11: float
    m22: float
    m33: float
    m44: float
    Xu: float
    Yv: float
    Zw: float
    Nr: float
    Xuu: float
    Yvv: float
    Zww: float
    Nrr: float
    thruster_matrix: np.ndarray
    dt: float
    heave_bias: float = 0.0

    def __post_init__(self):
        masses = (self.m11, self.m22, self.m33, self.m44)
        drags = (self.Xu, self.Yv, self.Zw, self.Nr,
                 self.Xuu, self.Yvv, self.Zww, self.Nrr)
        if not all(m > 0.0 and math.isfinite(m) for m in masses):
            raise ValueError(f"effective masses must be positive, got {masses}")
        if not all(d < 0.0 and math.isfinite(d) for d in drags):
            raise ValueError(f"drag coefficients must be negative, got {drags}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"sampling period must be positive, got {self.dt}")
        t = np.array(self.thruster_matrix, dtype=float)
        if t.shape != (4, 4):
            raise ValueError(f"thruster matrix must be 4x4, got shape {t.shape}")
        if not np.all(np.isfinite(t)) or not np.isfinite(np.linalg.cond(t)) \
                or np.linalg.cond(t) > 1e12:
            raise ValueError("thruster matrix must be finite and invertible")
        t.setflags(write=False)
        object.__setattr__(self, "thruster_matrix", t)
        # Plain-float copy for the scalar hot path in step().
        object.__setattr__(self, "_ta_rows",
                           tuple(tuple(float(v) for v in row) for row in t))
        # Thrust Jacobian of one Euler step is constant: dt * [0; M^-1 T].
        b = np.zeros((8, 4))
        inv_m = np.array([1.0 / self.m11, 1.0 / self.m22,
                          1.0 / self.m33, 1.0 / self.m44])
        b[4:, :] = self.dt * inv_m[:, None] * t
        b.setflags(write=False)
        object.__setattr__(self, "_jac_thrust", b)


def default_params(dt: float = 0.1) -> VehicleParams:
    """Synthetic parameter set plausible for a small inspection ROV.

    Values are round numbers in the right range for a ~20 kg vehicle, not an
    identified model. Port/starboard thrusters are canted 10 degrees off the
    surge axis with a 0.11 m moment arm; the lateral thruster acts through
    the center of gravity.
    """
    cant = math.radians(10.0)
    c, s = math.cos(cant), math.sin(cant)
    arm = 0.11  # m
    t_a = np.array([
        [c,    c,    0.0, 0.0],
        [s,   -s,    0.0, 1.0],
        [0.0,  0.0,  1.0, 0.0],
        [arm, -arm,  0.0, 0.0],
    ])
    return VehicleParams(
        m11=20.0, m22=25.0, m33=30.0, m44=12.0,
        Xu=-20.0, Yv=-25.0, Zw=-30.0, Nr=-6.0,
        Xuu=-15.0, Yvv=-20.0, Zww=-25.0, Nrr=-5.0,
        thruster_matrix=t_a, dt=dt,
    )


def allocate(params: VehicleParams, cmd: ThrustCommand) -> BodyForces:
    """Map per-thruster forces to generalized body forces."""
    f = params.thruster_matrix @ cmd.as_array()
    return BodyForces(X=float(f[0]), Y=float(f[1]), Z=float(f[2]), N=float(f[3]))


def _drift_terms(state: VehicleState, current: CurrentSample,
                 params: VehicleParams) -> tuple:
    """Drift as plain floats (hot path: called once per prediction step)."""
    c, s = math.cos(state.psi), math.sin(state.psi)
    u, v, w, r = state.u_r, state.v_r, state.w_r, state.r_r
    ci = current.inertial
    p = params
    return (
        u * c - v * s + float(ci[0]),
        u * s + v * c + float(ci[1]),
        w + float(ci[2]),
        r,
        (p.m22 * v * r + p.Xu * u + p.Xuu * abs(u) * u) / p.m11,
        (-p.m11 * u * r + p.Yv * v + p.Yvv * abs(v) * v) / p.m22,
        (p.Zw * w + p.Zww * abs(w) * w + p.heave_bias) / p.m33,
        ((p.m11 - p.m22) * u * v + p.Nr * r + p.Nrr * abs(r) * r) / p.m44,
    )


def drift(state: VehicleState, current: CurrentSample,
          params: VehicleParams) -> np.ndarray:
    """Unforced state derivative: advection kinematics plus Coriolis and drag."""
    return np.array(_drift_terms(state, current, params))


def _step_raw(x, tau, cur, params: VehicleParams) -> tuple:
    """Euler step on plain sequences (optimizer hot path); yaw wrapped.

    ``x`` is the 8-state, ``tau`` the 4 thruster forces, ``cur`` the
    inertial current 3-vector; any indexable number sequences work.
    """
    px, py, pz, psi = float(x[0]), float(x[1]), float(x[2]), float(x[3])
    u, v, w, r = float(x[4]), float(x[5]), float(x[6]), float(x[7])
    c, s = math.cos(psi), math.sin(psi)
    p = params
    t0, t1, t2, t3 = p._ta_rows
    q0, q1, q2, q3 = float(tau[0]), float(tau[1]), float(tau[2]), float(tau[3])
    fx = t0[0] * q0 + t0[1] * q1 + t0[2] * q2 + t0[3] * q3
    fy = t1[0] * q0 + t1[1] * q1 + t1[2] * q2 + t1[3] * q3
    fz = t2[0] * q0 + t2[1] * q1 + t2[2] * q2 + t2[3] * q3
    fn = t3[0] * q0 + t3[1] * q1 + t3[2] * q2 + t3[3] * q3
    dt = p.dt
    return (
        px + dt * (u * c - v * s + float(cur[0])),
        py + dt * (u * s + v * c + float(cur[1])),
        pz + dt * (w + float(cur[2])),
        wrap_angle(psi + dt * r),
        u + dt * ((p.m22 * v * r + p.Xu * u + p.Xuu * abs(u) * u + fx) / p.m11),
        v + dt * ((-p.m11 * u * r + p.Yv * v + p.Yvv * abs(v) * v + fy) / p.m22),
        w + dt * ((p.Zw * w + p.Zww * abs(w) * w + p.heave_bias + fz) / p.m33),
        r + dt * (((p.m11 - p.m22) * u * v + p.Nr * r + p.Nrr * abs(r) * r + fn) / p.m44),
    )


def step(state: VehicleState, cmd: ThrustCommand, current: CurrentSample,
         params: VehicleParams) -> VehicleState:
    """One forward-Euler step of the discrete model; yaw re-wrapped."""
    out = _step_raw(
        (state.x, state.y, state.z, state.psi,
         state.u_r, state.v_r, state.w_r, state.r_r),
        (cmd.tau_po, cmd.tau_s, cmd.tau_ve, cmd.tau_l),
        current.inertial, params)
    return VehicleState(*out)


def _jac_state_raw(x, params: VehicleParams) -> np.ndarray:
    """State Jacobian of one Euler step from the raw 8-state."""
    psi = float(x[3])
    u, v, w, r = float(x[4]), float(x[5]), float(x[6]), float(x[7])
    c, s = math.cos(psi), math.sin(psi)
    p = params
    dt = p.dt
    a = np.zeros((8, 8))
    a[0, 0] = a[1, 1] = a[2, 2] = a[3, 3] = 1.0
    a[0, 3] = dt * (-u * s - v * c)
    a[0, 4] = dt * c
    a[0, 5] = -dt * s
    a[1, 3] = dt * (u * c - v * s)
    a[1, 4] = dt * s
    a[1, 5] = dt * c
    a[2, 6] = dt
    a[3, 7] = dt
    a[4, 4] = 1.0 + dt * (p.Xu + 2.0 * p.Xuu * abs(u)) / p.m11
    a[4, 5] = dt * p.m22 * r / p.m11
    a[4, 7] = dt * p.m22 * v / p.m11
    a[5, 4] = -dt * p.m11 * r / p.m22
    a[5, 5] = 1.0 + dt * (p.Yv + 2.0 * p.Yvv * abs(v)) / p.m22
    a[5, 7] = -dt * p.m11 * u / p.m22
    a[6, 6] = 1.0 + dt * (p.Zw + 2.0 * p.Zww * abs(w)) / p.m33
    a[7, 4] = dt * (p.m11 - p.m22) * v / p.m44
    a[7, 5] = dt * (p.m11 - p.m22) * u / p.m44
    a[7, 7] = 1.0 + dt * (p.Nr + 2.0 * p.Nrr * abs(r)) / p.m44
    return a


def step_jacobians(state: VehicleState, cmd: ThrustCommand,
                   current: CurrentSample,
                   params: VehicleParams) -> tuple[np.ndarray, np.ndarray]:
    """Analytic Jacobians of :func:`step` w.r.t. state (8x8) and thrust (8x4).

    The current sample is held fixed (its spatial variation over one step is
    not differentiated). d(|v| v)/dv = 2 |v|, which is 0 at v = 0. The thrust
    block is constant: control enters affinely through the allocation matrix.
    """
    x = (state.x, state.y, state.z, state.psi,
         state.u_r, state.v_r, state.w_r, state.r_r)
    return _jac_state_raw(x, params), params._jac_thrust.copy()


def coriolis_power(state: VehicleState, params: VehicleParams) -> float:
    """Mechanical power of the velocity-coupling terms [W].

    Structurally zero: the coupling forces are skew w.r.t. the relative
    velocity, so they can never feed or drain energy. Exposed as a model
    self-check.
    """
    u, v, r = state.u_r, state.v_r, state.r_r
    return (u * (params.m22 * v * r)
            + v * (-params.m11 * u * r)
            + r * ((params.m11 - params.m22) * u * v))
