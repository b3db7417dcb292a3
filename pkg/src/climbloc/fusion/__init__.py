"""Per-axis attention fusion of modality estimates, refined by a UKF."""

from .attention import (
    AXES,
    AXIS_MODALITIES,
    MODALITIES,
    AttentionParams,
    FusedObservation,
    ReliabilityScores,
    attention_logits,
    encode,
    fuse,
    fusion_ratios,
    init_attention_params,
    init_encoders,
)
from .pipeline import (
    DEFAULT_L,
    FusionFrame,
    amfa_pipeline,
    collect_fusion_frames,
    run_fusion,
)
from .serialize import fusion_from_dict, fusion_to_dict
from .train import fusion_loss, fusion_loss_and_grads, train_fusion
from .ukf import UkfState, merwe_weights, ukf_step

__all__ = [
    "AXES",
    "AXIS_MODALITIES",
    "MODALITIES",
    "AttentionParams",
    "FusedObservation",
    "FusionFrame",
    "ReliabilityScores",
    "UkfState",
    "DEFAULT_L",
    "amfa_pipeline",
    "attention_logits",
    "collect_fusion_frames",
    "encode",
    "fuse",
    "fusion_from_dict",
    "fusion_loss",
    "fusion_loss_and_grads",
    "fusion_ratios",
    "fusion_to_dict",
    "init_attention_params",
    "init_encoders",
    "merwe_weights",
    "run_fusion",
    "train_fusion",
    "ukf_step",
]
