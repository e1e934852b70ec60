"""Inverse noise calibration: choose the laser noise that yields a target sensitivity."""
import logging
import math
from typing import Optional, TYPE_CHECKING

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate, relaxation_from_field
from .detector import (
    DetectorModel,
    mean_fluorescence_rate,
    signal_voltage,
    shot_noise_psd,
    electronic_noise_psd,
    laser_noise_shape,
    noise_psd,
)

if TYPE_CHECKING:
    from ..sensing.operating_point import OperatingPoint

logger = logging.getLogger(__name__)

# Relative slack under which a target at the floor is treated as the floor itself
FLOOR_TOLERANCE = 1e-9


class NoiseFloorError(ValueError):
    """Raised when a target sensitivity lies below the irreducible noise floor."""

    def __init__(self, target: float, limit: float):
        self.target = target
        self.limit = limit
        super().__init__(
            f"target sensitivity {target:.4g} T/sqrt(Hz) is below the shot/electronic noise "
            f"limit {limit:.4g} T/sqrt(Hz)"
        )


def _operating_rates(params: NVEnsembleParams, op_point: 'OperatingPoint',
                     constants: PhysicalConstants):
    gamma_p = pump_rate(op_point.laser_power, params)
    gamma_big_g = relaxation_from_field(op_point.reference_b, params, constants)
    # per-tesla^2 scale of the signal-induced relaxation
    gamma_g_unit = relaxation_from_field(1.0, params, constants)
    mean_rate = mean_fluorescence_rate(params, gamma_p, op_point.channels * gamma_big_g)
    return gamma_p, gamma_big_g, gamma_g_unit, mean_rate


def voltage_per_tesla(detector: DetectorModel, params: NVEnsembleParams,
                      op_point: 'OperatingPoint', constants: Optional[PhysicalConstants] = None) -> float:
    """Beat-tone voltage per tesla of signal field; the response is linear in b1."""
    constants = constants or PhysicalConstants()
    gamma_p, gamma_big_g, gamma_g_unit, _ = _operating_rates(params, op_point, constants)
    return signal_voltage(detector, params, gamma_p, gamma_big_g, gamma_g_unit,
                          op_point.delta, op_point.channels)


def detector_sensitivity(detector: DetectorModel, params: NVEnsembleParams,
                         op_point: 'OperatingPoint', constants: Optional[PhysicalConstants] = None) -> float:
    """
    Noise-limited sensitivity eta in T/sqrt(Hz): the SNR=1 field is eta/sqrt(t).

    Raises:
        ValueError: If the operating point has no heterodyne response
    """
    constants = constants or PhysicalConstants()
    responsivity = voltage_per_tesla(detector, params, op_point, constants)
    if responsivity <= 0:
        raise ValueError("operating point has no heterodyne response (zero pump or reference)")
    _, _, _, mean_rate = _operating_rates(params, op_point, constants)
    return math.sqrt(2.0 * noise_psd(detector, mean_rate, op_point.delta)) / responsivity


def calibrate_noise_to_sensitivity(
    detector: DetectorModel,
    params: NVEnsembleParams,
    target_sensitivity: float,
    op_point: 'OperatingPoint',
    constants: Optional[PhysicalConstants] = None
) -> DetectorModel:
    """
    Set the laser noise fraction so the detector reaches a target sensitivity.

    Args:
        detector: Detector whose shot and electronic noise are kept
        params: Ensemble parameters
        target_sensitivity: Desired sensitivity in T/sqrt(Hz)
        op_point: Laser power, reference field, beat frequency and channels
        constants: Physical constants

    Returns:
        DetectorModel with the adjusted laser_noise_fraction

    Raises:
        NoiseFloorError: If the target is below the shot/electronic limit
    """
    if not target_sensitivity > 0:
        raise ValueError(f"target_sensitivity must be > 0, got {target_sensitivity}")
    constants = constants or PhysicalConstants()
    responsivity = voltage_per_tesla(detector, params, op_point, constants)
    if responsivity <= 0:
        raise ValueError("operating point has no heterodyne response (zero pump or reference)")
    _, _, _, mean_rate = _operating_rates(params, op_point, constants)

    floor_psd = shot_noise_psd(detector, mean_rate) + electronic_noise_psd(detector)
    limit = math.sqrt(2.0 * floor_psd) / responsivity
    target_psd = 0.5 * (target_sensitivity * responsivity) ** 2
    laser_psd = target_psd - floor_psd
    if laser_psd < -FLOOR_TOLERANCE * floor_psd:
        raise NoiseFloorError(target_sensitivity, limit)
    laser_psd = max(laser_psd, 0.0)

    mean_volts = detector.volts(mean_rate)
    fraction = math.sqrt(laser_psd / laser_noise_shape(detector, op_point.delta)) / mean_volts
    logger.info(
        f"Calibrated laser noise | target={target_sensitivity:.4g} | limit={limit:.4g} | "
        f"laser_noise_fraction={fraction:.4g}"
    )
    return detector.with_laser_noise(fraction)
