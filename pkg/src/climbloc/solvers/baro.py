"""Barometric altitude from static pressure, and its algebraic inverse.

Altitude above the reference level follows the constant-lapse-rate model

    h(P) = (t0 / V) * (1 - (P / P0) ** (R * V / (g * M)))

with reference pressure P0 (Pa), reference temperature t0 (K), lapse rate
V (K/m), gravity g, molar mass of air M, and universal gas constant R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BaroReference:
    """Constants of the pressure-altitude model. Defaults: standard atmosphere."""

    p0: float = 101325.0       # Pa, pressure at the reference level
    t0: float = 288.15         # K, temperature at the reference level
    lapse_rate: float = 0.0065  # K/m
    gravity: float = 9.80665   # m/s^2
    molar_mass: float = 0.0289644  # kg/mol
    gas_constant: float = 8.31446  # J/(mol K)

    def __post_init__(self):
        for name in ("p0", "t0", "lapse_rate", "gravity", "molar_mass", "gas_constant"):
            if not getattr(self, name) > 0:
                raise ValueError(f"BaroReference.{name} must be > 0")

    @property
    def exponent(self) -> float:
        """R * V / (g * M), the pressure-ratio exponent."""
        return self.gas_constant * self.lapse_rate / (self.gravity * self.molar_mass)

    @property
    def ceiling(self) -> float:
        """t0 / V: the altitude where the model's temperature reaches zero."""
        return self.t0 / self.lapse_rate


def baro_altitude(pressure: float, ref: BaroReference = BaroReference()) -> float:
    """Altitude in meters above the reference level for a pressure in Pa.

    Strictly decreasing in pressure; h(p0) == 0 exactly.
    """
    if not pressure > 0:
        raise ValueError(f"pressure must be > 0, got {pressure}")
    return ref.ceiling * (1.0 - (pressure / ref.p0) ** ref.exponent)


def baro_inverse(altitude: float, ref: BaroReference = BaroReference()) -> float:
    """Pressure in Pa at a given altitude; inverse of :func:`baro_altitude`.

    Defined only below the model ceiling t0 / V.
    """
    if altitude >= ref.ceiling:
        raise ValueError(
            f"altitude {altitude} m is at or above the model ceiling {ref.ceiling} m"
        )
    return ref.p0 * (1.0 - altitude / ref.ceiling) ** (1.0 / ref.exponent)
