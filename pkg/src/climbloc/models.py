"""Windowed FCNN sensor models: UWB position regression and barometric altitude.

Both models consume a short history window of raw measurements and emit a
value head plus an error head. The error head is trained on the signed error
of the corresponding classical solver but consumed as a magnitude: it becomes
the per-axis sigma fed to the fusion stage, floored at SIGMA_MIN so no
modality ever claims zero variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.types import AnchorPose, BaroSample, UwbMeasurement
from .core.window import SlidingWindow
from .errors import ConfigError
from .nnet import Dataset, DenseNetwork, TrainConfig, net_forward, net_from_dict, net_init, net_to_dict, train
from .solvers.types import PoseEstimate
from .solvers.uwb import uwb_geometric_solve

SIGMA_MIN = 0.01  # m; keeps downstream fused variances strictly positive
DEFAULT_K = 10
DEFAULT_HIDDEN = (64, 64)


@dataclass(frozen=True)
class UwbFcnnModel:
    """k-step window of (d, alpha, beta), optionally plus the current geometric fix."""

    network: DenseNetwork
    k: int = DEFAULT_K
    include_geometric: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("window length k must be >= 1")
        if self.network.layer_sizes[0] != self.input_size(self.k, self.include_geometric):
            raise ConfigError(
                f"network input {self.network.layer_sizes[0]} != expected "
                f"{self.input_size(self.k, self.include_geometric)}"
            )
        if self.network.layer_sizes[-1] != 6:
            raise ConfigError("UWB model must emit 3 position + 3 error outputs")

    @staticmethod
    def input_size(k: int, include_geometric: bool) -> int:
        return 3 * k + (3 if include_geometric else 0)


@dataclass(frozen=True)
class BaroFcnnModel:
    """k-step window of pressures plus the sensor's own current altitude solution."""

    network: DenseNetwork
    k: int = DEFAULT_K

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("window length k must be >= 1")
        if self.network.layer_sizes[0] != self.k + 1:
            raise ConfigError(f"network input must be k+1 = {self.k + 1}")
        if self.network.layer_sizes[-1] != 2:
            raise ConfigError("baro model must emit (altitude, error) outputs")


def _window_items(window, k: int):
    items = tuple(window.items) if isinstance(window, SlidingWindow) else tuple(window)
    if len(items) < k:
        return None
    return items[-k:]


def uwb_features(measurements, anchor: AnchorPose, include_geometric: bool) -> np.ndarray:
    flat = []
    for m in measurements:
        flat.extend((m.range, m.alpha, m.beta))
    if include_geometric:
        flat.extend(uwb_geometric_solve(measurements[-1], anchor).position.as_array())
    return np.asarray(flat, dtype=float)


def baro_features(samples) -> np.ndarray:
    return np.asarray([s.pressure for s in samples] + [samples[-1].internal_altitude], dtype=float)


def uwb_fcnn_infer(model: UwbFcnnModel, window, anchor: AnchorPose):
    """PoseEstimate from a full window, or None while the window is filling."""
    items = _window_items(window, model.k)
    if items is None:
        return None
    out = net_forward(model.network, uwb_features(items, anchor, model.include_geometric))
    sigma = tuple(float(s) for s in np.maximum(np.abs(out[3:6]), SIGMA_MIN))
    return PoseEstimate(
        t=items[-1].t,
        position=_vec3(out[0:3]),
        sigma=sigma,
        source="uwb-fcnn",
    )


def baro_fcnn_infer(model: BaroFcnnModel, window):
    """(altitude, sigma_z) from a full window, or None while it is filling."""
    items = _window_items(window, model.k)
    if items is None:
        return None
    out = net_forward(model.network, baro_features(items))
    return float(out[0]), float(max(abs(out[1]), SIGMA_MIN))


def _vec3(a):
    from .core.types import Vec3Enu

    return Vec3Enu(float(a[0]), float(a[1]), float(a[2]))


def _truth_lookup(scenario):
    truth = scenario.truth
    dt = truth[1].t - truth[0].t

    def at(t: float):
        return truth[min(int(round(t / dt)), len(truth) - 1)]

    return at


def build_training_set(scenario, which: str, k: int = DEFAULT_K, include_geometric: bool = True) -> Dataset:
    """One example per full sliding window; targets pair truth with solver error.

    UWB rows: features = k*(d, a, b) [+ current geometric fix], targets =
    (truth position, truth - geometric fix). Baro rows: features = k pressures
    + current internal altitude, targets = (truth up, truth up - internal).
    """
    truth_at = _truth_lookup(scenario)
    inputs, targets = [], []
    if which == "uwb":
        stream = scenario.uwb
        if len(stream) < k:
            raise ValueError(f"need at least k={k} UWB measurements, got {len(stream)}")
        for i in range(k - 1, len(stream)):
            items = stream[i - k + 1 : i + 1]
            inputs.append(uwb_features(items, scenario.anchor, include_geometric))
            p_true = truth_at(items[-1].t).position.as_array()
            p_geo = uwb_geometric_solve(items[-1], scenario.anchor).position.as_array()
            targets.append(np.concatenate([p_true, p_true - p_geo]))
    elif which == "baro":
        stream = scenario.baro
        if len(stream) < k:
            raise ValueError(f"need at least k={k} baro samples, got {len(stream)}")
        for i in range(k - 1, len(stream)):
            items = stream[i - k + 1 : i + 1]
            inputs.append(baro_features(items))
            up_true = truth_at(items[-1].t).position.up
            targets.append(np.array([up_true, up_true - items[-1].internal_altitude]))
    else:
        raise ConfigError(f"unknown training-set kind {which!r} (expected 'uwb' or 'baro')")
    return Dataset(inputs=np.array(inputs), targets=np.array(targets))


def train_uwb_model(
    scenario,
    cfg: TrainConfig = TrainConfig(),
    k: int = DEFAULT_K,
    hidden=DEFAULT_HIDDEN,
    include_geometric: bool = True,
):
    data = build_training_set(scenario, "uwb", k=k, include_geometric=include_geometric)
    sizes = [UwbFcnnModel.input_size(k, include_geometric), *hidden, 6]
    net, history = train(net_init(sizes, cfg.seed), data, cfg)
    return UwbFcnnModel(network=net, k=k, include_geometric=include_geometric), history


def train_baro_model(scenario, cfg: TrainConfig = TrainConfig(), k: int = DEFAULT_K, hidden=DEFAULT_HIDDEN):
    data = build_training_set(scenario, "baro", k=k)
    net, history = train(net_init([k + 1, *hidden, 2], cfg.seed), data, cfg)
    return BaroFcnnModel(network=net, k=k), history


def model_to_dict(model) -> dict:
    if isinstance(model, UwbFcnnModel):
        return {
            "kind": "uwb-fcnn",
            "k": model.k,
            "include_geometric": model.include_geometric,
            "network": net_to_dict(model.network),
        }
    if isinstance(model, BaroFcnnModel):
        return {"kind": "baro-fcnn", "k": model.k, "network": net_to_dict(model.network)}
    raise ConfigError(f"not a serializable sensor model: {type(model).__name__}")


def model_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "uwb-fcnn":
        return UwbFcnnModel(
            network=net_from_dict(doc["network"]),
            k=int(doc["k"]),
            include_geometric=bool(doc.get("include_geometric", True)),
        )
    if kind == "baro-fcnn":
        return BaroFcnnModel(network=net_from_dict(doc["network"]), k=int(doc["k"]))
    raise ConfigError(f"unknown model kind {kind!r}")
