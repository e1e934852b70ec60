"""Photodetector model: voltage responsivity and one-sided noise spectral densities."""
import logging
import math
from dataclasses import dataclass, replace, asdict
from typing import Dict, Any

import numpy as np

from ..physics.constants import NVEnsembleParams
from ..physics.populations import equilibrium_population

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
# Gaussian shot noise is a fair stand-in for Poisson above this many photons per sample
MIN_PHOTONS_PER_SAMPLE = 100.0


@dataclass(frozen=True)
class DetectorModel:
    """
    Linear photodetector with shot, laser intensity and electronic noise.

    Attributes:
        volts_per_photon_rate: Responsivity, V per detected photon/s
        electronic_noise_density: White amplifier noise, V/sqrt(Hz)
        laser_noise_fraction: Relative intensity noise density below the corner, 1/sqrt(Hz)
        laser_noise_exponent: Spectral slope alpha of the laser noise above the corner
        laser_noise_corner: Corner frequency of the laser noise, Hz
        sample_rate: Sampling rate, Hz
        shot_noise: Whether photon shot noise is synthesized
    """
    volts_per_photon_rate: float = 5e-17
    electronic_noise_density: float = 0.0
    laser_noise_fraction: float = 0.0
    laser_noise_exponent: float = 1.0
    laser_noise_corner: float = 100.0
    sample_rate: float = 2000.0
    shot_noise: bool = True

    def __post_init__(self):
        errors = []
        if not self.volts_per_photon_rate > 0:
            errors.append(f"volts_per_photon_rate must be > 0, got {self.volts_per_photon_rate}")
        if not self.electronic_noise_density >= 0:
            errors.append(f"electronic_noise_density must be >= 0, got {self.electronic_noise_density}")
        if not self.laser_noise_fraction >= 0:
            errors.append(f"laser_noise_fraction must be >= 0, got {self.laser_noise_fraction}")
        if not 0.0 <= self.laser_noise_exponent <= 2.0:
            errors.append(f"laser_noise_exponent must be in [0, 2], got {self.laser_noise_exponent}")
        if not self.laser_noise_corner > 0:
            errors.append(f"laser_noise_corner must be > 0, got {self.laser_noise_corner}")
        if not self.sample_rate > 0:
            errors.append(f"sample_rate must be > 0, got {self.sample_rate}")
        if errors:
            raise ValueError("Invalid detector model:\n  - " + "\n  - ".join(errors))

    @property
    def is_noiseless(self) -> bool:
        return not self.shot_noise and self.electronic_noise_density == 0 and self.laser_noise_fraction == 0

    def noiseless(self) -> 'DetectorModel':
        """Copy with every noise source switched off."""
        return replace(self, shot_noise=False, electronic_noise_density=0.0, laser_noise_fraction=0.0)

    def with_laser_noise(self, fraction: float) -> 'DetectorModel':
        return replace(self, laser_noise_fraction=fraction)

    def volts(self, photon_rate):
        """Photovoltage for a detected photon rate."""
        return self.volts_per_photon_rate * photon_rate

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def fluorescence_rate(p0, params: NVEnsembleParams, gamma_p: float):
    """
    Detected photon rate R = n_nv * K * gamma_p * (1 - C * (1 - P0)).

    Raises:
        ValueError: If P0 leaves [0, 1]
    """
    p0_arr = np.asarray(p0, dtype=float)
    if np.any(p0_arr < 0) or np.any(p0_arr > 1):
        raise ValueError("p0 must lie in [0, 1]")
    rate = params.n_nv * params.collection_k * gamma_p * (1.0 - params.contrast * (1.0 - p0_arr))
    return float(rate) if rate.ndim == 0 else rate


def mean_fluorescence_rate(params: NVEnsembleParams, gamma_p: float, gamma_mw: float) -> float:
    """Photon rate at the equilibrium population under an average induced relaxation."""
    if gamma_p + params.gamma1 + gamma_mw == 0:
        return 0.0
    return fluorescence_rate(equilibrium_population(gamma_p, params.gamma1, gamma_mw), params, gamma_p)


def signal_voltage(
    detector: DetectorModel,
    params: NVEnsembleParams,
    gamma_p: float,
    gamma_big_g: float,
    gamma_g: float,
    delta: float,
    channels: int = 1
) -> float:
    """
    Beat-tone voltage amplitude for a signal interfering with one reference of ``channels``.

    Every active reference adds its relaxation to the population decay
    rate while only the nearest one interferes with the signal.
    """
    total = gamma_p + params.gamma1 + channels * gamma_big_g
    if total == 0:
        return 0.0
    delta_p0 = gamma_p * math.sqrt(gamma_big_g * gamma_g) / (total * math.hypot(total, TWO_PI * delta))
    scale = params.n_nv * params.collection_k * gamma_p * params.contrast
    return detector.volts_per_photon_rate * scale * delta_p0


def laser_noise_shape(detector: DetectorModel, f):
    """Unit-level laser noise shape: 1 below the corner, (corner/f)^alpha above."""
    f = np.abs(np.asarray(f, dtype=float))
    corner = detector.laser_noise_corner
    shape = np.where(f > corner, (corner / np.maximum(f, corner)) ** detector.laser_noise_exponent, 1.0)
    return float(shape) if shape.ndim == 0 else shape


def shot_noise_psd(detector: DetectorModel, mean_rate: float) -> float:
    """One-sided shot-noise voltage PSD, 2 * v^2 * R, V^2/Hz."""
    if not detector.shot_noise:
        return 0.0
    return 2.0 * detector.volts_per_photon_rate ** 2 * mean_rate


def laser_noise_psd(detector: DetectorModel, mean_rate: float, f):
    """One-sided laser-noise voltage PSD, (epsilon * V)^2 * shape(f), V^2/Hz."""
    mean_volts = detector.volts(mean_rate)
    return (detector.laser_noise_fraction * mean_volts) ** 2 * laser_noise_shape(detector, f)


def electronic_noise_psd(detector: DetectorModel) -> float:
    return detector.electronic_noise_density ** 2


def noise_psd(detector: DetectorModel, mean_rate: float, f):
    """Total one-sided voltage noise PSD at frequency f for a mean photon rate."""
    total = shot_noise_psd(detector, mean_rate) + laser_noise_psd(detector, mean_rate, f) + electronic_noise_psd(detector)
    return float(total) if np.ndim(total) == 0 else total


def noise_breakdown(detector: DetectorModel, mean_rate: float, f: float) -> Dict[str, float]:
    """Per-source PSD contributions at one frequency."""
    return {
        'shot': shot_noise_psd(detector, mean_rate),
        'laser': float(laser_noise_psd(detector, mean_rate, f)),
        'electronic': electronic_noise_psd(detector),
    }


def expected_snr(amplitude_v: float, detector: DetectorModel, mean_rate: float, delta: float, duration: float) -> float:
    """
    Expected peak-to-baseline ratio of a beat tone in the amplitude spectrum.

    SNR = A * sqrt(t) / sqrt(2 * S(delta)); infinite when the detector is noiseless.
    """
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    density = noise_psd(detector, mean_rate, delta)
    if density == 0:
        return math.inf if amplitude_v > 0 else 0.0
    return amplitude_v * math.sqrt(duration) / math.sqrt(2.0 * density)


def check_shot_noise_validity(detector: DetectorModel, mean_rate: float) -> bool:
    """Warn when too few photons fall in one sample for the Gaussian approximation."""
    photons = mean_rate / detector.sample_rate
    if detector.shot_noise and photons < MIN_PHOTONS_PER_SAMPLE:
        logger.warning(
            f"Gaussian shot noise approximation is poor | photons_per_sample={photons:.3g} | "
            f"minimum={MIN_PHOTONS_PER_SAMPLE:g}"
        )
        return False
    return True
