"""
Photodetector trace synthesis: voltage mapping, noise sources and calibration.
"""
from .detector import (
    DetectorModel,
    fluorescence_rate,
    mean_fluorescence_rate,
    signal_voltage,
    laser_noise_shape,
    shot_noise_psd,
    laser_noise_psd,
    electronic_noise_psd,
    noise_psd,
    noise_breakdown,
    expected_snr,
)
from .noise import chunk_generator, shaped_noise, add_detector_noise
from .trace_synthesizer import (
    AliasingError,
    DEFAULT_CHUNK_SAMPLES,
    scenario_fingerprint,
    synthesize_trace,
    direct_detection_drop,
)
from .calibration import (
    NoiseFloorError,
    voltage_per_tesla,
    detector_sensitivity,
    calibrate_noise_to_sensitivity,
)

__all__ = [
    'DetectorModel',
    'fluorescence_rate',
    'mean_fluorescence_rate',
    'signal_voltage',
    'laser_noise_shape',
    'shot_noise_psd',
    'laser_noise_psd',
    'electronic_noise_psd',
    'noise_psd',
    'noise_breakdown',
    'expected_snr',
    'chunk_generator',
    'shaped_noise',
    'add_detector_noise',
    'AliasingError',
    'DEFAULT_CHUNK_SAMPLES',
    'scenario_fingerprint',
    'synthesize_trace',
    'direct_detection_drop',
    'NoiseFloorError',
    'voltage_per_tesla',
    'detector_sensitivity',
    'calibrate_noise_to_sensitivity',
]
