"""Workspace geometry: boundary box, spherical obstacles, clearances.

The vehicle is abstracted as a ball of radius ``r_bar``; obstacles are
spheres, optionally flagged as full-depth pillars in which case only the
horizontal distance to the axis matters. The workspace boundary is an
axis-aligned box; the vehicle ball must stay inside the box inset by
``r_bar`` and outside every obstacle inflated by ``r_bar``.

Validation returns a list of violations (never raises) so callers can
report every problem in a configuration at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VehicleState

_AXES = "xyz"


@dataclass(frozen=True)
class Sphere:
    """Spherical obstacle. ``pillar=True`` marks a vertical cylinder spanning
    the whole water column, checked as a disc in the horizontal plane."""

    center: np.ndarray  # m, inertial frame
    radius: float       # m
    pillar: bool = False

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    def distance_to_center(self, p: np.ndarray) -> float:
        """Distance from point ``p`` to the obstacle center (axis for pillars)."""
        d = np.asarray(p, dtype=float).reshape(3) - self.center
        if self.pillar:
            return math.hypot(d[0], d[1])
        return float(np.linalg.norm(d))


@dataclass(frozen=True)
class VelocityBounds:
    """Symmetric relative-velocity limits.

    The planar limit applies to the signed sum ``|u_r + v_r|``; set
    ``planar_norm=True`` to bound the Euclidean norm ``sqrt(u^2 + v^2)``
    instead.
    """

    v_planar_max: float  # m/s
    w_max: float         # m/s
    r_max: float         # rad/s
    planar_norm: bool = False

    def __post_init__(self):
        if not (self.v_planar_max > 0 and self.w_max > 0 and self.r_max > 0):
            raise ValueError("velocity bounds must be strictly positive")

    def planar_speed(self, u_r: float, v_r: float) -> float:
        if self.planar_norm:
            return math.hypot(u_r, v_r)
        return abs(u_r + v_r)


@dataclass(frozen=True)
class Violation:
    """One failed workspace check: what failed, between whom, by how much."""

    code: str
    subject: str
    message: str
    margin: float | None = None


@dataclass(frozen=True)
class Workspace:
    box_min: np.ndarray            # m, lower box corner
    box_max: np.ndarray            # m, upper box corner
    obstacles: tuple[Sphere, ...] = ()
    r_bar: float = 0.3             # m, vehicle bounding radius

    def __post_init__(self):
        lo = np.asarray(self.box_min, dtype=float).reshape(3).copy()
        hi = np.asarray(self.box_max, dtype=float).reshape(3).copy()
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "box_min", lo)
        object.__setattr__(self, "box_max", hi)
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "r_bar", float(self.r_bar))


def validate(ws: Workspace) -> list[Violation]:
    """Check the workspace invariants; empty list means valid.

    Each obstacle pair must keep a center separation greater than
    ``2 r_bar + r_m + r_m'`` so the vehicle ball can always pass between
    them; every obstacle center must lie inside the box.
    """
    out: list[Violation] = []
    for a in range(3):
        if not ws.box_min[a] < ws.box_max[a]:
            out.append(Violation(
                "box_order", f"box.{_AXES[a]}",
                f"box_min[{_AXES[a]}]={ws.box_min[a]:g} is not below "
                f"box_max[{_AXES[a]}]={ws.box_max[a]:g}"))
    if not ws.r_bar > 0:
        out.append(Violation("r_bar", "r_bar", f"vehicle radius {ws.r_bar:g} must be positive"))
    for m, obs in enumerate(ws.obstacles):
        if not (obs.radius > 0 and math.isfinite(obs.radius)):
            out.append(Violation(
                "obstacle_radius", f"obstacles[{m}]",
                f"radius {obs.radius:g} must be positive"))
        if not np.all(np.isfinite(obs.center)):
            out.append(Violation(
                "obstacle_center", f"obstacles[{m}]", "center must be finite"))
            continue
        if np.any(obs.center < ws.box_min) or np.any(obs.center > ws.box_max):
            out.append(Violation(
                "obstacle_outside", f"obstacles[{m}]",
                f"center {obs.center.tolist()} lies outside the box"))
    for m in range(len(ws.obstacles)):
        for n in range(m + 1, len(ws.obstacles)):
            a, b = ws.obstacles[m], ws.obstacles[n]
            if a.pillar or b.pillar:
                sep = math.hypot(*(a.center[:2] - b.center[:2]))
            else:
                sep = float(np.linalg.norm(a.center - b.center))
            required = 2.0 * ws.r_bar + a.radius + b.radius
            if not sep > required:
                out.append(Violation(
                    "obstacle_pair", f"obstacles[{m}]/obstacles[{n}]",
                    f"separation {sep:g} m does not exceed required {required:g} m",
                    margin=required - sep))
    return out


def clearance(ws: Workspace, p) -> float:
    """Signed clearance of the vehicle ball centered at ``p`` [m].

    Minimum over all obstacles (center distance minus obstacle radius minus
    r_bar) and all six box faces (face distance minus r_bar). Positive iff
    the ball is strictly in free space; zero on the constraint boundary.
    """
    p = np.asarray(p, dtype=float).reshape(3)
    best = math.inf
    for a in range(3):
        best = min(best, p[a] - ws.box_min[a] - ws.r_bar,
                   ws.box_max[a] - p[a] - ws.r_bar)
    for obs in ws.obstacles:
        best = min(best, obs.distance_to_center(p) - obs.radius - ws.r_bar)
    return float(best)


def obstacle_clearance(ws: Workspace, p) -> float:
    """Clearance against obstacles only (inf when there are none)."""
    p = np.asarray(p, dtype=float).reshape(3)
    return float(min((obs.distance_to_center(p) - obs.radius - ws.r_bar
                      for obs in ws.obstacles), default=math.inf))


def _residuals_raw(ws: Workspace, bounds: VelocityBounds, s) -> np.ndarray:
    """Residual vector from a raw 8-state sequence (hot path)."""
    return np.array([
        bounds.v_planar_max - bounds.planar_speed(float(s[4]), float(s[5])),
        bounds.w_max - abs(float(s[6])),
        bounds.r_max - abs(float(s[7])),
        clearance(ws, (float(s[0]), float(s[1]), float(s[2]))),
    ])


def state_constraint_residuals(ws: Workspace, bounds: VelocityBounds,
                               s: VehicleState) -> np.ndarray:
    """State-constraint residual vector; the state is feasible iff all >= 0.

    Components: planar speed margin, heave speed margin, yaw rate margin,
    geometric clearance.
    """
    return _residuals_raw(ws, bounds,
                          (s.x, s.y, s.z, s.psi, s.u_r, s.v_r, s.w_r, s.r_r))


def _terms_raw(ws: Workspace, bounds: VelocityBounds, s, margin: float,
               with_jac: bool):
    """Core of :func:`constraint_terms` on a raw 8-state (hot path)."""
    n = 9 + len(ws.obstacles)
    g = np.empty(n)
    jac = np.zeros((n, 8)) if with_jac else None
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    u, v, w, r = float(s[4]), float(s[5]), float(s[6]), float(s[7])
    if bounds.planar_norm:
        speed = math.hypot(u, v)
        g[0] = bounds.v_planar_max - margin - speed
        if with_jac and speed > 0.0:
            jac[0, 4] = -u / speed
            jac[0, 5] = -v / speed
    else:
        g[0] = bounds.v_planar_max - margin - abs(u + v)
        if with_jac:
            sign = math.copysign(1.0, u + v) if u + v != 0.0 else 0.0
            jac[0, 4] = -sign
            jac[0, 5] = -sign
    g[1] = bounds.w_max - margin - abs(w)
    g[2] = bounds.r_max - margin - abs(r)
    if with_jac:
        jac[1, 6] = -math.copysign(1.0, w) if w != 0.0 else 0.0
        jac[2, 7] = -math.copysign(1.0, r) if r != 0.0 else 0.0

    lo, hi = ws.box_min, ws.box_max
    inset = ws.r_bar + margin
    pos = (x, y, z)
    for a in range(3):
        g[3 + 2 * a] = pos[a] - lo[a] - inset
        g[4 + 2 * a] = hi[a] - pos[a] - inset
        if with_jac:
            jac[3 + 2 * a, a] = 1.0
            jac[4 + 2 * a, a] = -1.0

    for m, obs in enumerate(ws.obstacles):
        i = 9 + m
        keep_out = obs.radius + ws.r_bar + margin
        dx = x - obs.center[0]
        dy = y - obs.center[1]
        dz = 0.0 if obs.pillar else z - obs.center[2]
        g[i] = dx * dx + dy * dy + dz * dz - keep_out * keep_out
        if with_jac:
            jac[i, 0] = 2.0 * dx
            jac[i, 1] = 2.0 * dy
            jac[i, 2] = 2.0 * dz
    return g, jac


def constraint_terms(ws: Workspace, bounds: VelocityBounds, s: VehicleState,
                     margin: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Smooth decomposition of the state constraints for the optimizer.

    Returns ``(g, J)`` with feasibility equivalent to ``g >= 0``: three
    velocity margins, six box-face margins (all shifted by ``margin``) and
    one term per obstacle in squared-distance form
    ``d^2 - (radius + r_bar + margin)^2``, which is smooth at the obstacle
    center. ``J[i]`` is the gradient of ``g[i]`` w.r.t. the 8-state;
    kinked absolute-value terms use subgradient 0 at the kink.
    """
    raw = (s.x, s.y, s.z, s.psi, s.u_r, s.v_r, s.w_r, s.r_r)
    return _terms_raw(ws, bounds, raw, margin, with_jac=True)
