"""Synthetic climbing-scenario generator: ground truth plus raw sensor logs."""

from .scenario import (
    BaroNoise,
    GpsNoise,
    ImuNoise,
    NlosWindow,
    OcclusionWindow,
    PauseSegment,
    ScenarioConfig,
    ScenarioData,
    TrajectoryProfile,
    UwbNoise,
    sensor_rng,
    sensor_times,
)
from .sensors import simulate_baro, simulate_gps, simulate_imu, simulate_scenario, simulate_uwb
from .truth import generate_truth, pause_speed, warped_time

__all__ = [
    "BaroNoise",
    "GpsNoise",
    "ImuNoise",
    "NlosWindow",
    "OcclusionWindow",
    "PauseSegment",
    "ScenarioConfig",
    "ScenarioData",
    "TrajectoryProfile",
    "UwbNoise",
    "generate_truth",
    "pause_speed",
    "sensor_rng",
    "sensor_times",
    "simulate_baro",
    "simulate_gps",
    "simulate_imu",
    "simulate_scenario",
    "simulate_uwb",
    "warped_time",
]
