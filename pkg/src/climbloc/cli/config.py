"""The single JSON configuration document and its section builders.

One file configures the whole pipeline, split into sections:
    sim     scenario generation (trajectory, sensor noise, outage windows)
    nnet    shared training-engine defaults (SGD rate, epochs, split)
    fcnn    sensor-model architecture plus per-model training overrides
    fusion  attention fusion dimensions and its training run
    ukf     sigma-point filter tuning
    eval    report thresholds and the accuracy/uncertainty trade-off weights

Unknown keys are rejected with their full dotted path, so typos fail loudly
instead of silently running on defaults. `config_digest` hashes the merged
document; the digest is stamped into the run manifest.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os

from ..core import GeodeticPoint, Rotation, Vec3Enu
from ..core.types import AnchorPose
from ..errors import ConfigError, MissingInputError
from ..fusion import UkfState
from ..nnet import TrainConfig
from ..sim import (
    BaroNoise,
    GpsNoise,
    ImuNoise,
    NlosWindow,
    OcclusionWindow,
    PauseSegment,
    ScenarioConfig,
    TrajectoryProfile,
    UwbNoise,
)
from ..solvers import BaroReference

DEFAULT_CONFIG = {
    "sim": {
        "duration": 120.0,
        "dt": 0.01,
        "seed": 7,
        "profile": {
            "vertical_amplitude": 10.0,
            "vertical_period": 120.0,
            "horizontal_amplitude": 0.8,
            "horizontal_period": 20.0,
            "yaw_amplitude": 0.1,
            "pauses": [
                {"start": 40.0, "end": 50.0, "ramp": 2.0},
                {"start": 80.0, "end": 90.0, "ramp": 2.0},
            ],
        },
        "imu": {
            "accel_sigma": 0.02,
            "gyro_sigma": 0.002,
            "accel_bias": [0.05, -0.03, 0.08],
            "gyro_bias": [0.001, -0.0005, 0.0008],
        },
        "gps": {
            "sigma_xy": 0.8,
            "sigma_z": 1.5,
            "rate_hz": 10.0,
            "base_hdop": 1.0,
            "occlusions": [
                {
                    "start": 50.0,
                    "end": 95.0,
                    "bias": [2.5, -1.5, 2.0],
                    "hdop_inflation": 4.0,
                    "dropout": 0.35,
                }
            ],
        },
        "uwb": {
            "range_sigma": 0.1,
            "angle_sigma": 0.01,
            "rate_hz": 10.0,
            "nlos_windows": [
                {"start": 30.0, "end": 45.0, "range_bias": 1.5},
                {"start": 100.0, "end": 110.0, "range_bias": 2.0},
            ],
            "nlos_confidence": 0.9,
            "los_confidence": 0.05,
            "confidence_sigma": 0.0,
        },
        "baro": {
            "pressure_sigma": 5.0,
            "drift_rate": 0.05,
            "rate_hz": 10.0,
        },
        "anchor_position": [0.0, 15.0, 5.0],
        "origin": {"lat": 0.48, "lon": 0.3, "height": 50.0},
    },
    "nnet": {
        "learning_rate": 1e-3,
        "epochs": 100,
        "batch_size": 32,
        "seed": 0,
        "axis_weights": [1.0, 1.0, 2.0],
        "split": 0.75,
    },
    "fcnn": {
        "k": 10,
        "hidden": [64, 64],
        "uwb": {"include_geometric": True, "learning_rate": 0.01, "epochs": 600},
        "baro": {"learning_rate": 0.01, "epochs": 300},
    },
    "fusion": {
        "window": 10,
        "embed_dim": 32,
        "key_dim": 16,
        "hidden": 64,
        "lambda": 1.0,
        "learning_rate": 0.01,
        "epochs": 120,
        "batch_size": 16,
        "seed": 0,
        "split": 0.95,
    },
    "ukf": {"alpha": 1e-3, "beta": 2.0, "kappa": 0.0, "q": 0.05},
    "eval": {
        "cdf_thresholds": [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0],
        "k1": 1.0,
        "k2": 1.0,
        "match_tolerance": None,
    },
}

# per-model training overrides allowed under fcnn.uwb / fcnn.baro
_TRAIN_KEYS = {"learning_rate", "epochs", "batch_size", "seed", "axis_weights", "split"}


def _merge(base, override, path=""):
    """Deep merge override into a copy of base; unknown keys are fatal."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        dotted = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{dotted}: unknown configuration key")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, path=f"{dotted}.")
        else:
            out[key] = value
    return out


def load_config(path=None) -> dict:
    """Defaults, overlaid with the JSON document at `path` when given."""
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    if not os.path.exists(path):
        raise MissingInputError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}:{err.lineno}: invalid JSON ({err.msg})") from err
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return _merge(DEFAULT_CONFIG, user)


def config_digest(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _build(section: str, factory, kwargs):
    try:
        return factory(**kwargs)
    except (ConfigError, TypeError, ValueError) as err:
        raise ConfigError(f"{section}: {err}") from err


def scenario_config(doc: dict) -> ScenarioConfig:
    sim = doc["sim"]
    profile = _build(
        "sim.profile",
        TrajectoryProfile,
        {
            **{k: v for k, v in sim["profile"].items() if k != "pauses"},
            "pauses": tuple(
                _build(f"sim.profile.pauses[{i}]", PauseSegment, p)
                for i, p in enumerate(sim["profile"]["pauses"])
            ),
        },
    )
    gps = _build(
        "sim.gps",
        GpsNoise,
        {
            **{k: v for k, v in sim["gps"].items() if k != "occlusions"},
            "occlusions": tuple(
                _build(f"sim.gps.occlusions[{i}]", OcclusionWindow, w)
                for i, w in enumerate(sim["gps"]["occlusions"])
            ),
        },
    )
    uwb = _build(
        "sim.uwb",
        UwbNoise,
        {
            **{k: v for k, v in sim["uwb"].items() if k != "nlos_windows"},
            "nlos_windows": tuple(
                _build(f"sim.uwb.nlos_windows[{i}]", NlosWindow, w)
                for i, w in enumerate(sim["uwb"]["nlos_windows"])
            ),
        },
    )
    baro = _build("sim.baro", BaroNoise, {**sim["baro"], "reference": BaroReference()})
    # the anchor keeps the default boresight (level, pointing at the wall);
    # only its mount position is configurable
    anchor = AnchorPose(
        position=_build("sim.anchor_position", Vec3Enu.from_array, {"a": sim["anchor_position"]}),
        orientation=Rotation.orthonormalized(
            [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]
        ),
    )
    origin = _build("sim.origin", GeodeticPoint, sim["origin"])
    return _build(
        "sim",
        ScenarioConfig,
        {
            "duration": sim["duration"],
            "dt": sim["dt"],
            "seed": sim["seed"],
            "profile": profile,
            "imu": _build("sim.imu", ImuNoise, sim["imu"]),
            "gps": gps,
            "uwb": uwb,
            "baro": baro,
            "anchor": anchor,
            "origin": origin,
        },
    )


def sensor_train_config(doc: dict, which: str, seed=None, epochs=None) -> TrainConfig:
    """nnet defaults overlaid with fcnn.<which> overrides, then CLI flags."""
    merged = dict(doc["nnet"])
    overrides = {k: v for k, v in doc["fcnn"].get(which, {}).items() if k in _TRAIN_KEYS}
    merged.update(overrides)
    if seed is not None:
        merged["seed"] = seed
    if epochs is not None:
        merged["epochs"] = epochs
    merged["axis_weights"] = tuple(merged["axis_weights"])
    return _build(f"fcnn.{which}", TrainConfig, merged)


def fcnn_options(doc: dict, which: str) -> dict:
    out = {"k": int(doc["fcnn"]["k"]), "hidden": tuple(doc["fcnn"]["hidden"])}
    if which == "uwb":
        out["include_geometric"] = bool(doc["fcnn"]["uwb"].get("include_geometric", True))
    return out


def fusion_train_config(doc: dict, seed=None, epochs=None) -> TrainConfig:
    fu = doc["fusion"]
    return _build(
        "fusion",
        TrainConfig,
        {
            "learning_rate": fu["learning_rate"],
            "epochs": epochs if epochs is not None else fu["epochs"],
            "batch_size": fu["batch_size"],
            "seed": seed if seed is not None else fu["seed"],
            "split": fu["split"],
        },
    )


def ukf_state(doc: dict) -> UkfState:
    return _build("ukf", UkfState, doc["ukf"])


def eval_options(doc: dict) -> dict:
    ev = doc["eval"]
    thresholds = [float(v) for v in ev["cdf_thresholds"]]
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ConfigError("eval.cdf_thresholds: must be sorted ascending")
    if ev["k1"] < 0 or ev["k2"] < 0:
        raise ConfigError("eval.k1/k2: trade-off weights must be >= 0")
    tolerance = ev["match_tolerance"]
    return {
        "cdf_thresholds": thresholds,
        "k1": float(ev["k1"]),
        "k2": float(ev["k2"]),
        "match_tolerance": None if tolerance is None else float(tolerance),
    }
