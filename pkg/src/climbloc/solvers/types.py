"""Estimate container shared by every localization algorithm."""

from __future__ import annotations

from dataclasses import dataclass

from ..core.types import Triple, Vec3Enu, _as_triple


@dataclass(frozen=True)
class PoseEstimate:
    """Position estimate in ENU with per-axis standard deviations (meters)."""

    t: float
    position: Vec3Enu
    sigma: Triple
    source: str

    def __post_init__(self):
        sigma = _as_triple(self.sigma)
        if any(s < 0 for s in sigma):
            raise ValueError(f"sigma components must be >= 0, got {sigma}")
        object.__setattr__(self, "sigma", sigma)
