"""Shared domain types: ENU vectors, rotations, and raw sensor samples.

Conventions used throughout the package:
    - navigation frame: local East-North-Up (ENU), meters
    - timestamps: float seconds, monotonic within a stream
    - angles: radians; pressures: pascals; rates: rad/s
    - gravity vector in ENU: (0, 0, -GRAVITY)

All values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GRAVITY = 9.80665  # m/s^2

Triple = tuple[float, float, float]

_ORTHO_TOL = 1e-9


def _as_triple(values) -> Triple:
    x, y, z = (float(v) for v in values)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise ValueError(f"components must be finite, got {(x, y, z)}")
    return (x, y, z)


@dataclass(frozen=True)
class Vec3Enu:
    """Position or displacement in the local ENU frame, meters."""

    east: float
    north: float
    up: float

    def __post_init__(self):
        for name in ("east", "north", "up"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"Vec3Enu.{name} must be finite, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.east, self.north, self.up], dtype=float)

    @staticmethod
    def from_array(a) -> "Vec3Enu":
        e, n, u = (float(v) for v in a)
        return Vec3Enu(e, n, u)

    def __add__(self, other: "Vec3Enu") -> "Vec3Enu":
        return Vec3Enu(self.east + other.east, self.north + other.north, self.up + other.up)

    def __sub__(self, other: "Vec3Enu") -> "Vec3Enu":
        return Vec3Enu(self.east - other.east, self.north - other.north, self.up - other.up)


class Rotation:
    """3x3 proper rotation matrix (orthonormal, det +1).

    Validated at construction: R^T R = I and det R = +1, both within 1e-9.
    Use :meth:`orthonormalized` to project a drifted matrix back onto SO(3)
    before wrapping it.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("rotation matrix must be finite")
        if np.max(np.abs(m.T @ m - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("matrix is not orthonormal within 1e-9")
        if abs(np.linalg.det(m) - 1.0) > _ORTHO_TOL:
            raise ValueError("matrix determinant is not +1 within 1e-9")
        m.flags.writeable = False
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        """Read-only 3x3 array."""
        return self._m

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(np.eye(3))

    @staticmethod
    def orthonormalized(matrix) -> "Rotation":
        """Nearest rotation (Frobenius sense) to an approximately-orthonormal matrix."""
        u, _, vt = np.linalg.svd(np.asarray(matrix, dtype=float))
        r = u @ vt
        if np.linalg.det(r) < 0:
            u[:, -1] = -u[:, -1]
            r = u @ vt
        return Rotation(r)

    @staticmethod
    def from_rotvec(rotvec) -> "Rotation":
        """Exponential map: rotation by angle ||v|| about axis v/||v||."""
        v = np.asarray(rotvec, dtype=float)
        angle = float(np.linalg.norm(v))
        if angle < 1e-12:
            k = _skew(v)
            return Rotation.orthonormalized(np.eye(3) + k)
        k = _skew(v / angle)
        m = np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)
        return Rotation.orthonormalized(m)

    def as_rotvec(self) -> np.ndarray:
        """Logarithm map, inverse of :meth:`from_rotvec`."""
        m = self._m
        cos_angle = max(-1.0, min(1.0, (np.trace(m) - 1.0) / 2.0))
        angle = math.acos(cos_angle)
        if angle < 1e-9:
            return np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]) / 2.0
        if angle > math.pi - 1e-6:
            # near pi: extract axis from the symmetric part
            a = (m + np.eye(3)) / 2.0
            axis = np.sqrt(np.maximum(np.diag(a), 0.0))
            # fix signs from off-diagonal terms
            i = int(np.argmax(axis))
            if axis[i] > 0:
                axis = a[:, i] / axis[i]
                axis = axis / np.linalg.norm(axis)
            return axis * angle
        axis = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
        return axis / (2.0 * math.sin(angle)) * angle

    def apply(self, v) -> np.ndarray:
        """Rotate a 3-vector into the target frame."""
        return self._m @ np.asarray(v, dtype=float)

    def compose(self, other: "Rotation") -> "Rotation":
        """self @ other (apply `other` first, then `self`)."""
        return Rotation.orthonormalized(self._m @ other._m)

    def transpose(self) -> "Rotation":
        return Rotation(self._m.T)

    def as_quaternion(self) -> np.ndarray:
        """Unit quaternion (w, x, y, z) for this rotation."""
        m = self._m
        t = np.trace(m)
        if t > 0:
            s = math.sqrt(t + 1.0) * 2.0
            w = 0.25 * s
            x = (m[2, 1] - m[1, 2]) / s
            y = (m[0, 2] - m[2, 0]) / s
            z = (m[1, 0] - m[0, 1]) / s
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            w = (m[2, 1] - m[1, 2]) / s
            x = 0.25 * s
            y = (m[0, 1] + m[1, 0]) / s
            z = (m[0, 2] + m[2, 0]) / s
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            w = (m[0, 2] - m[2, 0]) / s
            x = (m[0, 1] + m[1, 0]) / s
            y = 0.25 * s
            z = (m[1, 2] + m[2, 1]) / s
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
            w = (m[1, 0] - m[0, 1]) / s
            x = (m[0, 2] + m[2, 0]) / s
            y = (m[1, 2] + m[2, 1]) / s
            z = 0.25 * s
        q = np.array([w, x, y, z])
        return q / np.linalg.norm(q)

    @staticmethod
    def from_quaternion(q) -> "Rotation":
        w, x, y, z = (float(v) for v in q)
        n = math.sqrt(w * w + x * x + y * y + z * z)
        w, x, y, z = w / n, x / n, y / n, z / n
        m = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        return Rotation.orthonormalized(m)

    def __repr__(self):
        return f"Rotation({self._m.tolist()})"


def _skew(v) -> np.ndarray:
    """Cross-product matrix: skew(a) @ b == a x b."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


skew = _skew


@dataclass(frozen=True)
class ImuSample:
    """Body-frame specific force (m/s^2) and angular rate (rad/s) at time t."""

    t: float
    specific_force: Triple
    angular_rate: Triple

    def __post_init__(self):
        object.__setattr__(self, "specific_force", _as_triple(self.specific_force))
        object.__setattr__(self, "angular_rate", _as_triple(self.angular_rate))


@dataclass(frozen=True)
class GpsFix:
    """Geodetic GPS fix: latitude/longitude in radians, ellipsoidal height in meters."""

    t: float
    lat: float
    lon: float
    height: float
    hdop: float = 1.0
    valid: bool = True

    def __post_init__(self):
        if not abs(self.lat) <= math.pi / 2:
            raise ValueError(f"latitude must satisfy |lat| <= pi/2, got {self.lat}")
        if self.hdop < 0:
            raise ValueError(f"hdop must be >= 0, got {self.hdop}")


@dataclass(frozen=True)
class UwbMeasurement:
    """Planar-array UWB output: range d plus the two boresight angles (alpha, beta).

    `nlos_confidence` in [0, 1] is the device's own estimate of how likely the
    return was non-line-of-sight (1 = certainly obstructed).
    """

    t: float
    range: float
    alpha: float
    beta: float
    nlos_confidence: float = 0.0

    def __post_init__(self):
        if self.range < 0:
            raise ValueError(f"range must be >= 0, got {self.range}")
        if not abs(self.alpha) < math.pi / 2:
            raise ValueError(f"|alpha| must be < pi/2, got {self.alpha}")
        if not abs(self.beta) < math.pi / 2:
            raise ValueError(f"|beta| must be < pi/2, got {self.beta}")
        if not 0.0 <= self.nlos_confidence <= 1.0:
            raise ValueError(f"nlos_confidence must be in [0, 1], got {self.nlos_confidence}")


@dataclass(frozen=True)
class BaroSample:
    """Raw pressure (Pa) plus the sensor's own altitude solution (m)."""

    t: float
    pressure: float
    internal_altitude: float

    def __post_init__(self):
        if not self.pressure > 0:
            raise ValueError(f"pressure must be > 0, got {self.pressure}")
        if not math.isfinite(self.internal_altitude):
            raise ValueError("internal_altitude must be finite")


@dataclass(frozen=True)
class AnchorPose:
    """Mean antenna position and local-to-navigation rotation of the UWB anchor."""

    position: Vec3Enu
    orientation: Rotation


@dataclass(frozen=True)
class GroundTruthPoint:
    """Reference-grade state at time t: position, velocity, body-to-ENU attitude."""

    t: float
    position: Vec3Enu
    velocity: Triple
    attitude: Rotation

    def __post_init__(self):
        object.__setattr__(self, "velocity", _as_triple(self.velocity))
