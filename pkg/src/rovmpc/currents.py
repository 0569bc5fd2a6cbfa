"""Ambient current models and frame transforms.

All fields return the water velocity in the inertial frame as a 3-vector
[m/s]. Three models are provided:

* ``UniformCurrent`` - constant everywhere, the usual controller assumption.
* ``JetCurrent``     - closed-form plume of a fixed thruster: centerline
  speed decays inversely with axial distance past a core length, with a
  Gaussian radial profile.
* ``CurrentGrid``    - regular 2-D or 3-D lattice of velocity vectors
  (e.g. exported from a CFD run), sampled by multilinear interpolation and
  clamped to the nearest cell outside the lattice.

Fields are immutable after construction. Sampling accepts a time argument
for interface stability, but all models are static (slowly-varying flow
assumption).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError


def to_body(inertial: np.ndarray, psi: float) -> np.ndarray:
    """Rotate an inertial-frame velocity into the body frame at yaw ``psi``.

    Horizontal components go through the transposed yaw rotation; the
    vertical component is unchanged.
    """
    c, s = math.cos(psi), math.sin(psi)
    ux, uy, uz = float(inertial[0]), float(inertial[1]), float(inertial[2])
    return np.array([c * ux + s * uy, -s * ux + c * uy, uz])


def to_inertial(body: np.ndarray, psi: float) -> np.ndarray:
    """Inverse of :func:`to_body`."""
    c, s = math.cos(psi), math.sin(psi)
    ux, uy, uz = float(body[0]), float(body[1]), float(body[2])
    return np.array([c * ux - s * uy, s * ux + c * uy, uz])


@dataclass(frozen=True)
class CurrentSample:
    """Current velocity at one point, in both frames.

    ``body`` is always the yaw rotation of ``inertial``; use :func:`sample_at`
    to build consistent samples.
    """

    inertial: np.ndarray  # [u, v, w] in the inertial frame, m/s
    body: np.ndarray      # same vector expressed in the body frame, m/s

    @staticmethod
    def zero() -> "CurrentSample":
        return CurrentSample(np.zeros(3), np.zeros(3))


class UniformCurrent:
    """Spatially constant current."""

    def __init__(self, velocity) -> None:
        self.velocity = np.asarray(velocity, dtype=float).reshape(3).copy()
        if not np.all(np.isfinite(self.velocity)):
            raise ConfigError("uniform current velocity must be finite")
        self.velocity.setflags(write=False)
        self.max_speed = float(np.linalg.norm(self.velocity))

    def sample(self, p, t: float = 0.0) -> np.ndarray:
        return self.velocity


class JetCurrent:
    """Round-jet plume from a fixed source.

    The axial speed is ``peak_speed`` inside a potential core of length
    ``core_length`` and decays as ``core_length / s`` beyond it, where ``s``
    is the distance along the jet axis. Off axis the speed falls off as a
    Gaussian whose width grows linearly, ``spread_rate * max(s, core_length)``.
    Upstream of the source the velocity is zero. The returned vector always
    points along the jet axis (irrotational far-field idealization).
    """

    def __init__(self, origin, direction, peak_speed: float,
                 core_length: float = 0.5, spread_rate: float = 0.12) -> None:
        self.origin = np.asarray(origin, dtype=float).reshape(3).copy()
        d = np.asarray(direction, dtype=float).reshape(3)
        dn = np.linalg.norm(d)
        if not (dn > 0.0 and np.isfinite(dn)):
            raise ConfigError("jet direction must be a nonzero finite vector")
        self.direction = (d / dn).copy()
        if not (peak_speed >= 0.0 and core_length > 0.0 and spread_rate > 0.0):
            raise ConfigError("jet parameters must be positive (peak_speed >= 0)")
        self.peak_speed = float(peak_speed)
        self.core_length = float(core_length)
        self.spread_rate = float(spread_rate)
        self.origin.setflags(write=False)
        self.direction.setflags(write=False)
        self.max_speed = self.peak_speed

    def sample(self, p, t: float = 0.0) -> np.ndarray:
        rel = np.asarray(p, dtype=float).reshape(3) - self.origin
        s = float(rel @ self.direction)
        if s <= 0.0:
            return np.zeros(3)
        radial = rel - s * self.direction
        rho2 = float(radial @ radial)
        s_eff = max(s, self.core_length)
        axial = self.peak_speed * self.core_length / s_eff
        width = self.spread_rate * s_eff
        return (axial * math.exp(-rho2 / (width * width))) * self.direction


class CurrentGrid:
    """Regular lattice of inertial-frame velocity vectors.

    ``values`` is indexed ``[ix, iy]`` (2-D, velocities independent of z) or
    ``[ix, iy, iz]`` (3-D), each entry a 3-vector. Node k of axis a sits at
    ``origin[a] + k * spacing[a]``. Sampling outside the lattice clamps to
    the nearest edge, so samples are always bounded by the node values.
    """

    def __init__(self, origin, spacing, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.ndim not in (3, 4) or values.shape[-1] != 3:
            raise ConfigError("grid values must have shape dims + (3,) with 2 or 3 dims")
        ndim = values.ndim - 1
        self.origin = np.asarray(origin, dtype=float).reshape(ndim).copy()
        self.spacing = np.asarray(spacing, dtype=float).reshape(ndim).copy()
        if not np.all(self.spacing > 0.0):
            raise ConfigError("grid spacing must be positive")
        if any(n < 2 for n in values.shape[:-1]):
            raise ConfigError("grid needs at least 2 nodes per axis")
        if not np.all(np.isfinite(values)):
            raise ConfigError("grid values must be finite")
        self.values = values.copy()
        self.values.setflags(write=False)
        self.origin.setflags(write=False)
        self.spacing.setflags(write=False)
        self.dims = values.shape[:-1]
        self.max_speed = float(np.sqrt((values ** 2).sum(axis=-1)).max())

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def sample(self, p, t: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float).reshape(3)[: self.ndim]
        # Normalized lattice coordinates, clamped to the grid extent.
        u = (p - self.origin) / self.spacing
        u = np.clip(u, 0.0, np.array(self.dims) - 1.0)
        lo = np.minimum(u.astype(int), np.array(self.dims) - 2)
        f = u - lo
        if self.ndim == 2:
            ix, iy = lo
            fx, fy = f
            c = self.values
            v = ((1 - fx) * (1 - fy) * c[ix, iy]
                 + fx * (1 - fy) * c[ix + 1, iy]
                 + (1 - fx) * fy * c[ix, iy + 1]
                 + fx * fy * c[ix + 1, iy + 1])
        else:
            ix, iy, iz = lo
            fx, fy, fz = f
            c = self.values
            v00 = (1 - fx) * c[ix, iy, iz] + fx * c[ix + 1, iy, iz]
            v10 = (1 - fx) * c[ix, iy + 1, iz] + fx * c[ix + 1, iy + 1, iz]
            v01 = (1 - fx) * c[ix, iy, iz + 1] + fx * c[ix + 1, iy, iz + 1]
            v11 = (1 - fx) * c[ix, iy + 1, iz + 1] + fx * c[ix + 1, iy + 1, iz + 1]
            v = (1 - fz) * ((1 - fy) * v00 + fy * v10) + fz * ((1 - fy) * v01 + fy * v11)
        return v

    @classmethod
    def load(cls, path) -> "CurrentGrid":
        """Read a grid from a plain-text file.

        Format: comment lines start with ``#``; then three header lines
        ``dims``, ``origin`` and ``spacing`` (2 or 3 numbers each, matching),
        followed by one ``u v w`` triple per node in row-major order (last
        axis fastest).
        """
        path = Path(path)
        tokens: list[list[str]] = []
        with path.open() as fh:
            for line in fh:
                line = line.strip()
                if line and not line.startswith("#"):
                    tokens.append(line.split())
        if len(tokens) < 3:
            raise ConfigError(f"{path}: truncated grid file")
        header = {}
        for row in tokens[:3]:
            if row[0] not in ("dims", "origin", "spacing"):
                raise ConfigError(f"{path}: expected dims/origin/spacing header, got {row[0]!r}")
            header[row[0]] = row[1:]
        if set(header) != {"dims", "origin", "spacing"}:
            raise ConfigError(f"{path}: missing header line(s) {sorted({'dims', 'origin', 'spacing'} - set(header))}")
        try:
            dims = tuple(int(v) for v in header["dims"])
            origin = [float(v) for v in header["origin"]]
            spacing = [float(v) for v in header["spacing"]]
        except ValueError as exc:
            raise ConfigError(f"{path}: bad header value ({exc})") from exc
        if len(dims) not in (2, 3) or len(origin) != len(dims) or len(spacing) != len(dims):
            raise ConfigError(f"{path}: dims/origin/spacing must all have 2 or 3 entries")
        n_nodes = int(np.prod(dims))
        body = tokens[3:]
        if len(body) != n_nodes:
            raise ConfigError(f"{path}: expected {n_nodes} velocity rows, found {len(body)}")
        try:
            flat = np.array([[float(v) for v in row] for row in body])
        except ValueError as exc:
            raise ConfigError(f"{path}: bad velocity value ({exc})") from exc
        if flat.shape != (n_nodes, 3):
            raise ConfigError(f"{path}: each velocity row needs exactly 3 components")
        return cls(origin, spacing, flat.reshape(dims + (3,)))


# Anything with a .sample(p, t) -> 3-vector method.
CurrentField = UniformCurrent | JetCurrent | CurrentGrid


def sample_at(field: CurrentField, p, psi: float, t: float = 0.0) -> CurrentSample:
    """Sample ``field`` at position ``p`` and attach the body-frame view."""
    inertial = np.asarray(field.sample(p, t), dtype=float)
    return CurrentSample(inertial=inertial, body=to_body(inertial, psi))
