"""Raw sensor stream synthesis from ground truth.

Each simulator draws from its own seeded substream and consumes a fixed
number of draws per tick regardless of window membership, so reconfiguring
an occlusion or NLOS window never shifts the noise realized elsewhere.
"""

from __future__ import annotations

import math

import numpy as np

from ..core.geodesy import GeodeticPoint, enu_to_geodetic
from ..core.types import GRAVITY, BaroSample, GpsFix, ImuSample, UwbMeasurement, Vec3Enu
from ..errors import NumericalFailureError
from ..solvers.baro import baro_altitude, baro_inverse
from ..solvers.uwb import uwb_inverse
from .scenario import (
    BARO_STREAM,
    GPS_STREAM,
    IMU_STREAM,
    UWB_STREAM,
    ScenarioConfig,
    ScenarioData,
    sensor_rng,
    sensor_times,
)
from .truth import generate_truth

_G_ENU = np.array([0.0, 0.0, -GRAVITY])
_MAX_ANGLE = math.pi / 2 - 1e-9


def simulate_imu(truth, cfg: ScenarioConfig) -> tuple[ImuSample, ...]:
    """Body-frame IMU stream by differencing consecutive truth states.

    Sample i covers [t_i, t_{i+1}): acceleration from the velocity increment,
    angular rate from the relative rotation vector, both plus configured bias
    and white noise. Differencing (rather than analytic derivatives) makes a
    noiseless stream integrate back to the truth velocities exactly.
    """
    if len(truth) < 2:
        raise ValueError("need at least two truth points to difference")
    rng = sensor_rng(cfg.seed, IMU_STREAM)
    accel_bias = np.asarray(cfg.imu.accel_bias)
    gyro_bias = np.asarray(cfg.imu.gyro_bias)
    out = []
    for a, b in zip(truth, truth[1:]):
        dt = b.t - a.t
        accel = (np.asarray(b.velocity) - np.asarray(a.velocity)) / dt
        f_body = a.attitude.matrix.T @ (accel - _G_ENU)
        w_body = a.attitude.transpose().compose(b.attitude).as_rotvec() / dt
        f = f_body + accel_bias + rng.normal(0.0, 1.0, 3) * cfg.imu.accel_sigma
        w = w_body + gyro_bias + rng.normal(0.0, 1.0, 3) * cfg.imu.gyro_sigma
        out.append(ImuSample(t=a.t, specific_force=tuple(f), angular_rate=tuple(w)))
    return tuple(out)


def _truth_index(t: float, dt: float, n: int) -> int:
    i = int(round(t / dt))
    return min(i, n - 1)


def simulate_gps(truth, cfg: ScenarioConfig, origin: GeodeticPoint) -> tuple[GpsFix, ...]:
    rng = sensor_rng(cfg.seed, GPS_STREAM)
    g = cfg.gps
    sigma = np.array([g.sigma_xy, g.sigma_xy, g.sigma_z])
    fixes = []
    for t in sensor_times(cfg.duration, g.rate_hz):
        noise = rng.normal(0.0, 1.0, 3) * sigma
        u_drop = rng.uniform()
        p = truth[_truth_index(t, cfg.dt, len(truth))].position.as_array() + noise
        hdop = g.base_hdop
        dropped = False
        for w in g.occlusions:
            if w.contains(t):
                p = p + np.asarray(w.bias)
                hdop *= w.hdop_inflation
                dropped = u_drop < w.dropout
                break
        if dropped:
            continue
        geo = enu_to_geodetic(Vec3Enu.from_array(p), origin)
        fixes.append(GpsFix(t=t, lat=geo.lat, lon=geo.lon, height=geo.height, hdop=hdop))
    return tuple(fixes)


def simulate_uwb(truth, anchor, cfg: ScenarioConfig) -> tuple[UwbMeasurement, ...]:
    rng = sensor_rng(cfg.seed, UWB_STREAM)
    u = cfg.uwb
    out = []
    for t in sensor_times(cfg.duration, u.rate_hz):
        n_range, n_alpha, n_beta = rng.normal(0.0, 1.0, 3)
        n_conf = rng.normal(0.0, 1.0)
        target = truth[_truth_index(t, cfg.dt, len(truth))].position
        d, alpha, beta = uwb_inverse(target, anchor)
        d += n_range * u.range_sigma
        alpha += n_alpha * u.angle_sigma
        beta += n_beta * u.angle_sigma
        conf = u.los_confidence
        for w in u.nlos_windows:
            if w.contains(t):
                d += w.range_bias
                conf = u.nlos_confidence
                break
        conf = min(1.0, max(0.0, conf + n_conf * u.confidence_sigma))
        out.append(
            UwbMeasurement(
                t=t,
                range=max(d, 1e-9),
                alpha=max(-_MAX_ANGLE, min(_MAX_ANGLE, alpha)),
                beta=max(-_MAX_ANGLE, min(_MAX_ANGLE, beta)),
                nlos_confidence=conf,
            )
        )
    return tuple(out)


def simulate_baro(truth, cfg: ScenarioConfig) -> tuple[BaroSample, ...]:
    """Pressure stream: inverse model of true altitude plus linear drift and noise."""
    rng = sensor_rng(cfg.seed, BARO_STREAM)
    b = cfg.baro
    out = []
    for t in sensor_times(cfg.duration, b.rate_hz):
        noise = rng.normal(0.0, 1.0) * b.pressure_sigma
        up = truth[_truth_index(t, cfg.dt, len(truth))].position.up
        pressure = baro_inverse(up, b.reference) + b.drift_rate * t + noise
        if pressure <= 0.0:
            raise NumericalFailureError(
                f"simulated pressure {pressure:.3f} Pa <= 0 at t={t:.3f}"
            )
        out.append(
            BaroSample(t=t, pressure=pressure, internal_altitude=baro_altitude(pressure, b.reference))
        )
    return tuple(out)


def simulate_scenario(cfg: ScenarioConfig) -> ScenarioData:
    """Generate truth and all four sensor streams for one configuration."""
    truth = generate_truth(cfg)
    return ScenarioData(
        truth=truth,
        imu=simulate_imu(truth, cfg),
        gps=simulate_gps(truth, cfg, cfg.origin),
        uwb=simulate_uwb(truth, cfg.anchor, cfg),
        baro=simulate_baro(truth, cfg),
        anchor=cfg.anchor,
        baro_reference=cfg.baro.reference,
        origin=cfg.origin,
    )
