"""Strapdown mechanization and the loosely-coupled GPS/INS error-state EKF.

The nominal state (position, velocity, body-to-ENU attitude) is integrated
from IMU samples with first-order Euler steps at the IMU rate. The filter
estimates the 9-dimensional error state

    x = [dr (3), dv (3), eps (3)]

where `eps` is the small-angle attitude error, with the convention
estimate = true + error (attitude: C_hat = (I - skew(eps)) C_true). The
error dynamics use configurable coefficient blocks; the defaults are the
local-frame small-area simplification (F_rr = 0, F_rv = I, F_er = F_ev = 0,
zero earth rates), adequate for trajectories spanning well under 100 m.
Position fixes fold the estimated error back into the nominal state and
reset the error to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.types import GRAVITY, ImuSample, Rotation, Vec3Enu, skew
from ..errors import NumericalFailureError
from .types import PoseEstimate

GRAVITY_ENU = np.array([0.0, 0.0, -GRAVITY])


@dataclass(frozen=True)
class InsState:
    """Nominal INS state: ENU position, ENU velocity, body-to-ENU attitude."""

    position: Vec3Enu
    velocity: tuple[float, float, float]
    attitude: Rotation


def ins_mechanize(state: InsState, imu: ImuSample, dt: float) -> InsState:
    """One Euler step of strapdown integration.

    Attitude advances by the small-angle exponential of (angular_rate * dt)
    and is re-orthonormalized; velocity integrates the navigation-frame
    specific force plus gravity; position integrates the updated velocity.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    rot = state.attitude
    f_n = rot.apply(imu.specific_force)
    omega = np.asarray(imu.angular_rate, dtype=float)
    rot_new = Rotation.orthonormalized(rot.matrix @ Rotation.from_rotvec(omega * dt).matrix)
    v_new = np.asarray(state.velocity) + (f_n + GRAVITY_ENU) * dt
    p_new = state.position.as_array() + v_new * dt
    return InsState(
        position=Vec3Enu.from_array(p_new),
        velocity=tuple(float(v) for v in v_new),
        attitude=rot_new,
    )


def _default_p0() -> np.ndarray:
    return np.diag([4.0, 4.0, 4.0, 0.25, 0.25, 0.25, 0.01, 0.01, 0.01])


def _zeros3() -> np.ndarray:
    return np.zeros((3, 3))


def _eye3() -> np.ndarray:
    return np.eye(3)


def _zerovec() -> np.ndarray:
    return np.zeros(3)


@dataclass
class InsErrorModel:
    """Error-state covariance plus the configurable dynamics coefficients.

    `q_*` are continuous-time white-noise intensities feeding the position,
    velocity, and attitude error blocks. `gps_sigma` is the 1-sigma ENU
    measurement noise of a position fix at HDOP 1; the measurement
    covariance is scaled by hdop^2 when `scale_r_by_hdop` is set.
    """

    P: np.ndarray = field(default_factory=_default_p0)
    F_rr: np.ndarray = field(default_factory=_zeros3)
    F_rv: np.ndarray = field(default_factory=_eye3)
    F_er: np.ndarray = field(default_factory=_zeros3)
    F_ev: np.ndarray = field(default_factory=_zeros3)
    omega_ie: np.ndarray = field(default_factory=_zerovec)
    omega_en: np.ndarray = field(default_factory=_zerovec)
    q_pos: float = 0.0          # m^2/s^3 equivalent on the dr block
    q_vel: float = 4e-4         # (m/s^2)^2/Hz, accelerometer noise
    q_att: float = 4e-6         # (rad/s)^2/Hz, gyro noise
    gps_sigma: tuple[float, float, float] = (0.8, 0.8, 1.5)
    scale_r_by_hdop: bool = True

    def __post_init__(self):
        self.P = np.array(self.P, dtype=float)
        if self.P.shape != (9, 9):
            raise ValueError("P must be 9x9")
        if np.max(np.abs(self.P - self.P.T)) > 1e-12:
            raise ValueError("P must be symmetric within 1e-12")
        if np.min(np.linalg.eigvalsh((self.P + self.P.T) / 2)) < -1e-12:
            raise ValueError("P must be positive semidefinite")

    def transition(self, f_n: np.ndarray, dt: float) -> np.ndarray:
        """First-order discrete transition I + F dt for the current specific force."""
        f_mat = np.zeros((9, 9))
        f_mat[0:3, 0:3] = self.F_rr
        f_mat[0:3, 3:6] = self.F_rv
        f_mat[3:6, 3:6] = -skew(2.0 * self.omega_ie + self.omega_en)
        f_mat[3:6, 6:9] = skew(f_n)
        f_mat[6:9, 0:3] = self.F_er
        f_mat[6:9, 3:6] = self.F_ev
        f_mat[6:9, 6:9] = skew(self.omega_ie + self.omega_en)
        return np.eye(9) + f_mat * dt

    def process_noise(self, dt: float) -> np.ndarray:
        q = np.zeros((9, 9))
        q[0:3, 0:3] = self.q_pos * np.eye(3)
        q[3:6, 3:6] = self.q_vel * np.eye(3)
        q[6:9, 6:9] = self.q_att * np.eye(3)
        return q * dt


class GpsInsEkf:
    """Single-owner GPS/INS filter: propagate at the IMU rate, update on fixes.

    Measurements enter as ENU positions (callers convert geodetic fixes with
    the run origin). The last innovation magnitude and HDOP are kept for the
    downstream reliability scoring.
    """

    # estimate = true + error, so the position measurement matrix is -[I 0 0]
    _H = np.hstack([-np.eye(3), np.zeros((3, 6))])

    def __init__(self, state: InsState, model: InsErrorModel | None = None):
        self.state = state
        self.model = model if model is not None else InsErrorModel()
        self.last_innovation = 0.0
        self.last_hdop = 1.0

    def propagate(self, imu: ImuSample, dt: float) -> None:
        f_n = self.state.attitude.apply(imu.specific_force)
        self.state = ins_mechanize(self.state, imu, dt)
        phi = self.model.transition(f_n, dt)
        p = phi @ self.model.P @ phi.T + self.model.process_noise(dt)
        self.model.P = (p + p.T) / 2.0

    def update(self, position: Vec3Enu, hdop: float = 1.0) -> np.ndarray:
        """Apply one ENU position fix; returns the 3-vector innovation."""
        p = self.model.P
        h = self._H
        r = np.diag(np.asarray(self.model.gps_sigma, dtype=float) ** 2)
        if self.model.scale_r_by_hdop:
            r = r * max(hdop, 1e-6) ** 2
        nu = position.as_array() - self.state.position.as_array()
        s = h @ p @ h.T + r
        k = p @ h.T @ np.linalg.inv(s)
        delta = k @ nu
        ikh = np.eye(9) - k @ h
        p_new = ikh @ p @ ikh.T + k @ r @ k.T
        p_new = (p_new + p_new.T) / 2.0
        scale = max(1.0, float(np.trace(p_new)))
        if np.min(np.linalg.eigvalsh(p_new)) < -1e-12 * scale:
            raise NumericalFailureError("GPS/INS covariance lost positive semidefiniteness")
        self.model.P = p_new

        # fold the error estimate back into the nominal state, then reset it
        pos = self.state.position.as_array() - delta[0:3]
        vel = np.asarray(self.state.velocity) - delta[3:6]
        att = Rotation.orthonormalized((np.eye(3) + skew(delta[6:9])) @ self.state.attitude.matrix)
        self.state = InsState(Vec3Enu.from_array(pos), tuple(float(v) for v in vel), att)
        self.last_innovation = float(np.linalg.norm(nu))
        self.last_hdop = float(hdop)
        return nu

    def step(
        self,
        imu: ImuSample,
        dt: float,
        position: Vec3Enu | None = None,
        hdop: float = 1.0,
    ) -> PoseEstimate:
        """Propagate one IMU interval and, when given, apply a position fix."""
        self.propagate(imu, dt)
        if position is not None:
            self.update(position, hdop)
        return self.estimate(imu.t + dt)

    def estimate(self, t: float) -> PoseEstimate:
        sigma = tuple(float(s) for s in np.sqrt(np.maximum(np.diag(self.model.P)[0:3], 0.0)))
        return PoseEstimate(t=t, position=self.state.position, sigma=sigma, source="gpsins-ekf")
