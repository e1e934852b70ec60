"""Rate conversions: Rabi frequency, induced relaxation and optical pumping."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import PhysicalConstants, NVEnsembleParams

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DerivedRates:
    """Rate bundle for one drive configuration, all in s^-1."""
    g: float              # signal Rabi frequency, Hz
    big_g: float          # reference Rabi frequency, Hz
    gamma_g: float        # signal-induced relaxation
    gamma_big_g: float    # reference-induced relaxation
    gamma_p: float        # polarization rate

    def __post_init__(self):
        for name in ('g', 'big_g', 'gamma_g', 'gamma_big_g', 'gamma_p'):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    def decay_rate(self, gamma1: float) -> float:
        """Relaxation rate of the population toward equilibrium, gamma_p + gamma1 + gamma_G."""
        return self.gamma_p + gamma1 + self.gamma_big_g


def rabi_frequency(b, constants: Optional[PhysicalConstants] = None):
    """
    Rabi frequency g = gamma_nv * b / sqrt(2).

    Args:
        b: Microwave field amplitude in tesla (scalar or array)
        constants: Physical constants, defaults used when omitted

    Returns:
        Rabi frequency in Hz

    Raises:
        ValueError: If b is negative
    """
    constants = constants or PhysicalConstants()
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0):
        raise ValueError(f"field amplitude must be >= 0, got {b}")
    g = constants.gamma_nv * b_arr / SQRT2
    return float(g) if g.ndim == 0 else g


def field_from_rabi(g, constants: Optional[PhysicalConstants] = None):
    """Inverse of :func:`rabi_frequency`."""
    constants = constants or PhysicalConstants()
    b = SQRT2 * np.asarray(g, dtype=float) / constants.gamma_nv
    return float(b) if b.ndim == 0 else b


def induced_relaxation(g, gamma2: float, detuning=0.0):
    """
    Microwave-induced relaxation between |0> and |1>.

    On resonance this is g^2/gamma2; off resonance it is weighted by the
    Lorentzian factor gamma2^2 / (gamma2^2 + detuning^2).

    Raises:
        ValueError: If gamma2 is not positive
    """
    if not gamma2 > 0:
        raise ValueError(f"gamma2 must be > 0, got {gamma2}")
    g = np.asarray(g, dtype=float)
    detuning = np.asarray(detuning, dtype=float)
    rate = (g * g / gamma2) * gamma2 ** 2 / (gamma2 ** 2 + detuning ** 2)
    return float(rate) if rate.ndim == 0 else rate


def pump_rate(laser_power: float, params: NVEnsembleParams) -> float:
    """Polarization rate gamma_p = pump_coeff * P_L."""
    if not laser_power >= 0:
        raise ValueError(f"laser_power must be >= 0, got {laser_power}")
    return params.pump_coeff * laser_power


def relaxation_from_field(b, params: NVEnsembleParams,
                          constants: Optional[PhysicalConstants] = None, detuning=0.0):
    """Shortcut for induced_relaxation(rabi_frequency(b), gamma2, detuning)."""
    return induced_relaxation(rabi_frequency(b, constants), params.gamma2, detuning)


def derive_rates(
    params: NVEnsembleParams,
    laser_power: float,
    reference_b: float,
    signal_b: float = 0.0,
    constants: Optional[PhysicalConstants] = None,
    detuning: float = 0.0
) -> DerivedRates:
    """
    Build the rate bundle for a reference/signal drive pair.

    Args:
        params: Ensemble parameters
        laser_power: Laser power in W
        reference_b: Reference tone amplitude in tesla
        signal_b: Signal tone amplitude in tesla
        constants: Physical constants
        detuning: Common detuning of both tones from the line, Hz

    Returns:
        DerivedRates
    """
    g = rabi_frequency(signal_b, constants)
    big_g = rabi_frequency(reference_b, constants)
    return DerivedRates(
        g=g,
        big_g=big_g,
        gamma_g=induced_relaxation(g, params.gamma2, detuning),
        gamma_big_g=induced_relaxation(big_g, params.gamma2, detuning),
        gamma_p=pump_rate(laser_power, params),
    )
