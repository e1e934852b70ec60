"""ODMR lineshape of the 14N hyperfine triplet."""
import logging
from typing import Optional

import numpy as np

from .constants import PhysicalConstants, NVEnsembleParams
from .rates import rabi_frequency, induced_relaxation, pump_rate
from .populations import equilibrium_population
from ..repository.models import Spectrum

logger = logging.getLogger(__name__)

HYPERFINE_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def odmr_spectrum(
    params: NVEnsembleParams,
    constants: Optional[PhysicalConstants],
    scan_b: float,
    laser_power: float,
    freq_grid,
    center_frequency: Optional[float] = None
) -> Spectrum:
    """
    Fluorescence versus microwave frequency, normalized to the microwave-off level.

    Each hyperfine class (one third of the ensemble) sees the scanned tone detuned
    by its own line offset; the class populations follow the equilibrium
    solution with the Lorentzian-weighted induced relaxation, and the
    fluorescence is the population-weighted average.

    Args:
        params: Ensemble parameters
        constants: Physical constants (defaults when None)
        scan_b: Scanned microwave field amplitude in tesla
        laser_power: Laser power in W
        freq_grid: Uniform grid of absolute microwave frequencies in Hz
        center_frequency: Central hyperfine line in Hz, defaults to the zero-field splitting

    Returns:
        Spectrum whose amplitudes are relative fluorescence (1.0 = microwave off)

    Raises:
        ValueError: If the frequency grid is empty
    """
    constants = constants or PhysicalConstants()
    freqs = np.asarray(freq_grid, dtype=float)
    if freqs.size == 0:
        raise ValueError("freq_grid cannot be empty")
    center = constants.d_zfs if center_frequency is None else center_frequency

    gamma_p = pump_rate(laser_power, params)
    g = rabi_frequency(scan_b, constants)
    peak_relaxation = induced_relaxation(g, params.gamma2)
    if peak_relaxation > params.gamma2 / 10.0:
        logger.warning(
            f"Scanned field too strong for the weak-drive lineshape | gamma_g={peak_relaxation:.4g} | "
            f"gamma2={params.gamma2:.4g}"
        )

    def fluorescence(p0):
        return 1.0 - params.contrast * (1.0 - p0)

    off_level = fluorescence(equilibrium_population(gamma_p, params.gamma1, 0.0))
    level = np.zeros_like(freqs)
    for weight, line_offset in zip(HYPERFINE_WEIGHTS, (-constants.a_hf, 0.0, constants.a_hf)):
        gamma_g = induced_relaxation(g, params.gamma2, freqs - (center + line_offset))
        level += weight * fluorescence(equilibrium_population(gamma_p, params.gamma1, gamma_g))

    return Spectrum(
        bin_frequencies=freqs,
        amplitudes=level / off_level,
        duration=0.0,
        window="odmr",
        metadata={
            'center_frequency_hz': center,
            'scan_b_tesla': scan_b,
            'laser_power_w': laser_power,
            'line_offsets_hz': [-constants.a_hf, 0.0, constants.a_hf],
        },
    )
