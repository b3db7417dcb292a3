"""Epoch-aligned fusion front-end and the full attention-fusion pipeline.

`collect_fusion_frames` runs the shared per-epoch machinery once: it drives
the GPS/INS filter at the IMU rate, produces the UWB and barometer estimates
(model output when their measurement windows are full, geometric solutions
before that), maintains the per-modality estimate windows, and scores
reliability. Both training and application consume the resulting frames, so
the two phases see identical inputs by construction.

`amfa_pipeline` then encodes, attends, fuses, and UKF-updates per epoch.
Epochs that cannot fuse (an axis with every estimate window still filling)
pass the GPS/INS solution through with inflated sigma; the application
pipeline additionally drops the leading run of those, so its trajectory
starts at the first fused epoch.
"""

from __future__ import annotations

import logging
import statistics
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..core.geodesy import GeodeticPoint, geodetic_to_enu
from ..core.types import Rotation, Vec3Enu
from ..core.window import SlidingWindow
from ..errors import MissingInputError
from ..models import DEFAULT_K, SIGMA_MIN, baro_fcnn_infer, uwb_fcnn_infer
from ..solvers.baro import baro_altitude
from ..solvers.ins import GpsInsEkf, InsState
from ..solvers.types import PoseEstimate
from ..solvers.uwb import uwb_geometric_solve
from .attention import (
    AXES,
    AXIS_MODALITIES,
    MODALITIES,
    AttentionParams,
    ReliabilityScores,
    attention_logits,
    encode,
    fuse,
    fusion_ratios,
)
from .ukf import UkfState, ukf_step

log = logging.getLogger("climbloc.fusion")

DEFAULT_L = 10
WARMUP_SIGMA_INFLATION = 3.0
_EPS = 1e-9


@dataclass(frozen=True)
class FusionFrame:
    """Everything one fusion epoch needs, precomputed by the front-end."""

    t: float
    windows: dict        # modality -> flattened estimate window, None until full
    reliability: ReliabilityScores
    estimates: dict      # modality -> {axis: meters}; absent modalities omitted
    sigmas: dict         # modality -> {axis: sigma}
    fallback: PoseEstimate
    truth_position: np.ndarray | None = None

    def ready(self) -> tuple:
        return tuple(
            m for m in MODALITIES if self.windows.get(m) is not None and m in self.estimates
        )

    def fusible(self) -> bool:
        ready = set(self.ready())
        return all(any(m in ready for m in AXIS_MODALITIES[s]) for s in AXES)


def _epoch_times(scenario) -> list:
    """Fusion epochs: timestamps of the slowest measurement stream.

    Slowness is judged by the widest minimum inter-sample gap; ties go to
    the densest stream. Faster streams are latest-sample-held at each epoch.
    """
    streams = [s for s in (scenario.uwb, scenario.baro, scenario.gps) if len(s) >= 2]
    if streams:
        def min_gap(stream):
            return min(b.t - a.t for a, b in zip(stream, stream[1:]))

        slowest = max(streams, key=lambda s: (min_gap(s), len(s)))
        return [m.t for m in slowest]
    times = sorted({m.t for s in (scenario.uwb, scenario.baro, scenario.gps) for m in s})
    if not times:
        raise MissingInputError("no measurement stream to define fusion epochs")
    return times


def _truth_lookup(truth):
    if not truth:
        return lambda t: None
    dt = truth[1].t - truth[0].t if len(truth) > 1 else 1.0

    def at(t: float):
        return truth[min(int(round(t / dt)), len(truth) - 1)].position.as_array()

    return at


def _axis_dict(values) -> dict:
    return {s: float(v) for s, v in zip(AXES, values)}


def collect_fusion_frames(
    scenario,
    uwb_model=None,
    baro_model=None,
    L: int = DEFAULT_L,
    initial_state: InsState | None = None,
    ekf_model=None,
) -> tuple[FusionFrame, ...]:
    """One FusionFrame per epoch, driving all modality estimators in lockstep."""
    imu = scenario.imu
    if len(imu) < 2:
        raise MissingInputError("fusion needs an IMU stream with at least two samples")
    imu_gaps = [b.t - a.t for a, b in zip(imu, imu[1:])]
    imu_gaps.append(imu_gaps[-1])

    if initial_state is None:
        # runs start at the local origin, at rest, level
        initial_state = InsState(Vec3Enu(0.0, 0.0, 0.0), (0.0, 0.0, 0.0), Rotation.identity())
    ekf = GpsInsEkf(initial_state, ekf_model)

    uwb_k = uwb_model.k if uwb_model is not None else DEFAULT_K
    baro_k = baro_model.k if baro_model is not None else DEFAULT_K
    uwb_meas = SlidingWindow(uwb_k)
    baro_meas = SlidingWindow(baro_k)
    est_windows = {m: deque(maxlen=L) for m in MODALITIES}

    i_imu = i_gps = i_uwb = i_baro = 0
    gps, uwb, baro = scenario.gps, scenario.uwb, scenario.baro
    frames = []

    def advance_imu(until: float):
        nonlocal i_imu
        while i_imu < len(imu) and imu[i_imu].t + imu_gaps[i_imu] <= until + _EPS:
            ekf.propagate(imu[i_imu], imu_gaps[i_imu])
            i_imu += 1

    for t_k in _epoch_times(scenario):
        while i_gps < len(gps) and gps[i_gps].t <= t_k + _EPS:
            fix = gps[i_gps]
            i_gps += 1
            if not fix.valid:
                continue
            advance_imu(fix.t)
            enu = geodetic_to_enu(GeodeticPoint(fix.lat, fix.lon, fix.height), scenario.origin)
            ekf.update(enu, fix.hdop)
        advance_imu(t_k)
        while i_uwb < len(uwb) and uwb[i_uwb].t <= t_k + _EPS:
            uwb_meas = uwb_meas.push(uwb[i_uwb])
            i_uwb += 1
        while i_baro < len(baro) and baro[i_baro].t <= t_k + _EPS:
            baro_meas = baro_meas.push(baro[i_baro])
            i_baro += 1

        estimates, sigmas = {}, {}

        gps_est = ekf.estimate(t_k)
        estimates["gpsins"] = _axis_dict(gps_est.position.as_array())
        sigmas["gpsins"] = _axis_dict(gps_est.sigma)
        est_windows["gpsins"].append(gps_est.position.as_array())
        r_gpsins = (1.0 / (1.0 + ekf.last_hdop), ekf.last_innovation)

        r_uwb = (0.0, 0.0)
        if len(uwb_meas):
            pose = uwb_fcnn_infer(uwb_model, uwb_meas, scenario.anchor) if uwb_model else None
            if pose is None:
                pose = uwb_geometric_solve(uwb_meas.items[-1], scenario.anchor)
            estimates["uwb"] = _axis_dict(pose.position.as_array())
            sigmas["uwb"] = _axis_dict(pose.sigma)
            est_windows["uwb"].append(pose.position.as_array())
            r_uwb = (1.0 - uwb_meas.items[-1].nlos_confidence, float(np.mean(pose.sigma)))

        r_baro = (0.0, 0.0)
        if len(baro_meas):
            result = baro_fcnn_infer(baro_model, baro_meas) if baro_model else None
            if result is None:
                alt = baro_altitude(baro_meas.items[-1].pressure, scenario.baro_reference)
                seen = [float(v) for v in est_windows["baro"]] + [alt]
                sigma_z = max(float(np.std(seen)), SIGMA_MIN)
            else:
                alt, sigma_z = result
            estimates["baro"] = {"z": float(alt)}
            sigmas["baro"] = {"z": float(sigma_z)}
            est_windows["baro"].append(float(alt))
            spread = statistics.pvariance(est_windows["baro"]) if len(est_windows["baro"]) > 1 else 0.0
            r_baro = (1.0 / (1.0 + spread), sigma_z)

        windows = {
            m: np.asarray(est_windows[m], dtype=float).ravel()
            if len(est_windows[m]) == L and m in estimates
            else None
            for m in MODALITIES
        }
        frames.append(
            FusionFrame(
                t=t_k,
                windows=windows,
                reliability=ReliabilityScores(uwb=r_uwb, gpsins=r_gpsins, baro=r_baro),
                estimates=estimates,
                sigmas=sigmas,
                fallback=gps_est,
                truth_position=_truth_lookup(scenario.truth)(t_k),
            )
        )
    return tuple(frames)


def run_fusion(
    frames,
    encoders: dict,
    params: AttentionParams,
    ukf_state: UkfState | None = None,
    lam: float = 1.0,
    warmup_inflation: float = WARMUP_SIGMA_INFLATION,
):
    """Attend + fuse + UKF over precomputed frames.

    Returns (pose estimates, fused observations), index-aligned with the
    frames; the observation slot is None on warm-up epochs. Modalities that
    drop out of a fusible epoch are renormalized away by the softmax and
    logged once each.
    """
    state = ukf_state if ukf_state is not None else UkfState()
    estimates, observations = [], []
    prev_t = None
    fused_before = False
    warned = set()
    for frame in frames:
        dt = frame.t - prev_t if prev_t is not None else None
        prev_t = frame.t
        if not frame.fusible():
            fb = frame.fallback
            estimates.append(
                PoseEstimate(
                    t=frame.t,
                    position=fb.position,
                    sigma=tuple(s * warmup_inflation for s in fb.sigma),
                    source="amfa",
                )
            )
            observations.append(None)
            continue
        ready = set(frame.ready())
        if fused_before:
            for m in set(MODALITIES) - ready - warned:
                log.warning("modality %s unavailable at t=%.3f; fusing without it", m, frame.t)
                warned.add(m)
        embeddings = encode(encoders, {m: frame.windows[m] if m in ready else None for m in MODALITIES})
        ratios = fusion_ratios(attention_logits(params, embeddings, frame.reliability))
        obs = fuse(ratios, frame.estimates, frame.sigmas, lam=lam, t=frame.t)
        if dt is None:
            dt = 0.1
        state, est = ukf_step(state, _floored(obs), dt)
        estimates.append(est)
        observations.append(obs)
        fused_before = True
    return tuple(estimates), tuple(observations)


def _floored(obs):
    """Keep the UKF's measurement covariance strictly positive."""
    floor = SIGMA_MIN**2
    if np.all(obs.variance >= floor):
        return obs
    from .attention import FusedObservation

    return FusedObservation(
        t=obs.t,
        position=obs.position,
        variance=np.maximum(obs.variance, floor),
        ratios=obs.ratios,
    )


def amfa_pipeline(
    scenario,
    uwb_model,
    baro_model,
    encoders: dict,
    params: AttentionParams,
    ukf_state: UkfState | None = None,
    L: int = DEFAULT_L,
    lam: float = 1.0,
) -> tuple[PoseEstimate, ...]:
    """Full application phase: frames -> attention fusion -> UKF trajectory.

    Emission starts at the first fused epoch; later non-fusible epochs (a
    modality dropping below window length mid-run) still yield the inflated
    fallback pose so the trajectory has no interior gaps.
    """
    frames = collect_fusion_frames(scenario, uwb_model, baro_model, L=L)
    poses, observations = run_fusion(frames, encoders, params, ukf_state, lam=lam)
    first = next((i for i, obs in enumerate(observations) if obs is not None), len(poses))
    return poses[first:]
