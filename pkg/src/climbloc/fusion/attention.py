"""Per-axis attention over modality estimates with adaptive covariance.

Each axis runs its own softmax over the modalities that can observe it: the
horizontal axes see UWB and GPS/INS, the vertical axis additionally sees the
barometer. A logit combines three terms: scaled query-key agreement between
learned embeddings of the recent estimate windows, a gated linear read of
hand-computed reliability features, and a trainable prior bias.

The fused measurement variance adds the ratio-weighted intrinsic variances
to a divergence penalty: lambda times the ratio-weighted squared spread of
the modality estimates around the fused value. Agreeing modalities therefore
tighten the covariance; disagreeing ones inflate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..nnet import DenseNetwork, net_forward, net_init

AXES = ("x", "y", "z")
MODALITIES = ("uwb", "gpsins", "baro")
AXIS_MODALITIES = {
    "x": ("uwb", "gpsins"),
    "y": ("uwb", "gpsins"),
    "z": ("uwb", "gpsins", "baro"),
}
AXIS_INDEX = {"x": 0, "y": 1, "z": 2}
N_RELIABILITY = 2  # features per modality

DEFAULT_EMBED_DIM = 32
DEFAULT_KEY_DIM = 16
DEFAULT_LAMBDA = 1.0


@dataclass(frozen=True)
class ReliabilityScores:
    """Two hand-computed quality features per modality, all finite and >= 0.

    uwb: (1 - nlos_confidence, mean model sigma); gpsins: (1/(1+hdop),
    innovation magnitude); baro: (1/(1+window variance), sigma_z).
    """

    uwb: tuple
    gpsins: tuple
    baro: tuple

    def __post_init__(self):
        for name in MODALITIES:
            r = tuple(float(v) for v in getattr(self, name))
            if len(r) != N_RELIABILITY:
                raise ValueError(f"{name} reliability needs {N_RELIABILITY} features")
            if not all(math.isfinite(v) and v >= 0 for v in r):
                raise ValueError(f"{name} reliability must be finite and >= 0, got {r}")
            object.__setattr__(self, name, r)

    def of(self, modality: str) -> np.ndarray:
        return np.asarray(getattr(self, modality), dtype=float)


@dataclass
class AttentionParams:
    """Learnable fusion parameters; mutable because training updates in place."""

    w_q: dict          # axis -> (d_k, 3*d_e)
    w_k: np.ndarray    # (d_k, d_e), shared across modalities
    beta: dict         # axis -> float gate on the reliability term
    w_r: dict          # axis -> (N_RELIABILITY,) reliability read-out
    b_prior: dict      # (modality, axis) -> float
    d_k: int = DEFAULT_KEY_DIM

    def __post_init__(self):
        if self.d_k <= 0:
            raise ConfigError("d_k must be positive")
        d_e3 = self.w_k.shape[1] * 3
        for s in AXES:
            if self.w_q[s].shape != (self.d_k, d_e3):
                raise ConfigError(f"w_q[{s}] must be (d_k, 3*d_e)")
            if self.w_r[s].shape != (N_RELIABILITY,):
                raise ConfigError(f"w_r[{s}] must have {N_RELIABILITY} entries")
        if self.w_k.shape[0] != self.d_k:
            raise ConfigError("w_k rows must equal d_k")
        for m in MODALITIES:
            for s in AXES:
                self.b_prior.setdefault((m, s), 0.0)


def init_attention_params(
    d_e: int = DEFAULT_EMBED_DIM, d_k: int = DEFAULT_KEY_DIM, seed: int = 0
) -> AttentionParams:
    """Small random maps, unit reliability gates, barometer-on-z prior of ln 2."""
    rng = np.random.default_rng(seed)
    scale_q = 1.0 / math.sqrt(3 * d_e)
    scale_k = 1.0 / math.sqrt(d_e)
    params = AttentionParams(
        w_q={s: rng.normal(0.0, scale_q, (d_k, 3 * d_e)) for s in AXES},
        w_k=rng.normal(0.0, scale_k, (d_k, d_e)),
        beta={s: 1.0 for s in AXES},
        w_r={s: rng.normal(0.0, 0.1, N_RELIABILITY) for s in AXES},
        b_prior={(m, s): 0.0 for m in MODALITIES for s in AXES},
        d_k=d_k,
    )
    params.b_prior[("baro", "z")] = math.log(2.0)
    return params


WINDOW_WIDTHS = {"uwb": 3, "gpsins": 3, "baro": 1}  # values per window entry


def init_encoders(
    L: int = 10, d_e: int = DEFAULT_EMBED_DIM, hidden: int = 64, seed: int = 0
) -> dict:
    """One fresh single-hidden-layer encoder per modality, seeded per modality."""
    return {
        m: net_init([WINDOW_WIDTHS[m] * L, hidden, d_e], seed + i)
        for i, m in enumerate(MODALITIES)
    }


def encode(encoders: dict, windows: dict) -> dict:
    """Embed each modality's flattened estimate window; None windows pass through."""
    out = {}
    for m, window in windows.items():
        if window is None:
            out[m] = None
            continue
        net: DenseNetwork = encoders[m]
        flat = np.asarray(window, dtype=float).ravel()
        if flat.shape[0] != net.layer_sizes[0]:
            raise ValueError(f"{m} window length {flat.shape[0]} != encoder input {net.layer_sizes[0]}")
        out[m] = net_forward(net, flat)
    return out


def attention_logits(params: AttentionParams, embeddings: dict, reliability: ReliabilityScores) -> dict:
    """Per-axis logits over that axis's available modalities.

    The query concatenates all three embeddings; a missing modality
    contributes a zero block and is excluded from its axes' softmax.
    """
    d_e = params.w_k.shape[1]
    blocks = [
        embeddings.get(m) if embeddings.get(m) is not None else np.zeros(d_e) for m in MODALITIES
    ]
    zc = np.concatenate(blocks)
    scale = 1.0 / math.sqrt(params.d_k)
    keys = {m: params.w_k @ z for m, z in embeddings.items() if z is not None}
    logits = {}
    for s in AXES:
        q = params.w_q[s] @ zc
        axis = {}
        for m in AXIS_MODALITIES[s]:
            if m not in keys:
                continue
            rel = float(params.w_r[s] @ reliability.of(m))
            axis[m] = float(q @ keys[m] * scale + params.beta[s] * rel + params.b_prior[(m, s)])
        logits[s] = axis
    return logits


def fusion_ratios(logits: dict) -> dict:
    """Max-stabilized softmax per axis; empty axes yield empty ratio dicts."""
    ratios = {}
    for s, axis in logits.items():
        if not axis:
            ratios[s] = {}
            continue
        names = list(axis)
        raw = np.array([axis[m] for m in names])
        shifted = np.exp(raw - raw.max())
        gamma = shifted / shifted.sum()
        ratios[s] = {m: float(g) for m, g in zip(names, gamma)}
    return ratios


@dataclass(frozen=True)
class FusedObservation:
    """Fused position measurement with its adaptive diagonal covariance."""

    t: float
    position: np.ndarray   # fused (x, y, z)
    variance: np.ndarray   # diagonal of the measurement covariance
    ratios: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "variance", np.asarray(self.variance, dtype=float))
        if self.position.shape != (3,) or self.variance.shape != (3,):
            raise ValueError("position and variance must be 3-vectors")
        if np.any(self.variance < 0):
            raise ValueError("variance components must be >= 0")
        for s, axis in self.ratios.items():
            if axis:
                total = sum(axis.values())
                if abs(total - 1.0) > 1e-9 or any(not 0.0 <= g <= 1.0 for g in axis.values()):
                    raise ValueError(f"axis {s} ratios are not a probability vector: {axis}")


def fuse(ratios: dict, estimates: dict, sigmas: dict, lam: float = DEFAULT_LAMBDA, t: float = 0.0) -> FusedObservation:
    """Convex combination per axis plus the divergence-inflated variance.

    `estimates[m]` and `sigmas[m]` hold the axis values the modality can see
    (dicts axis -> float). Variance per axis: sum_m gamma sigma^2 + lam *
    sum_m gamma (x_hat - fused)^2.
    """
    position = np.zeros(3)
    variance = np.zeros(3)
    for s in AXES:
        axis_ratios = ratios.get(s) or {}
        i = AXIS_INDEX[s]
        if not axis_ratios:
            raise ValueError(f"no modality available for axis {s}")
        fused = sum(g * estimates[m][s] for m, g in axis_ratios.items())
        intrinsic = sum(g * sigmas[m][s] ** 2 for m, g in axis_ratios.items())
        divergence = sum(g * (estimates[m][s] - fused) ** 2 for m, g in axis_ratios.items())
        position[i] = fused
        variance[i] = intrinsic + lam * divergence
    return FusedObservation(t=t, position=position, variance=variance, ratios=ratios)
