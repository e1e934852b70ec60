"""Photovoltage trace synthesis from integrated population dynamics."""
import hashlib
import json
import logging
from dataclasses import asdict, replace
from typing import Optional, Tuple

import numpy as np

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.rates import pump_rate
from ..dynamics.scenario import DriveScenario
from ..dynamics.integrator import integrate_rate_equations
from ..repository.models import PopulationTrajectory, TimeTrace
from .detector import DetectorModel, fluorescence_rate, check_shot_noise_validity
from .noise import add_detector_noise

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SAMPLES = 1 << 20


class AliasingError(ValueError):
    """Raised when the sample rate cannot represent the scenario's beat frequencies."""

    def __init__(self, sample_rate: float, beat_frequency: float):
        self.sample_rate = sample_rate
        self.beat_frequency = beat_frequency
        super().__init__(
            f"sample_rate {sample_rate:g} Hz must exceed twice the highest beat frequency "
            f"{beat_frequency:g} Hz"
        )


def scenario_fingerprint(
    scenario: DriveScenario,
    params: NVEnsembleParams,
    detector: DetectorModel,
    seed: int,
    constants: Optional[PhysicalConstants] = None,
    chunk_samples: int = DEFAULT_CHUNK_SAMPLES
) -> str:
    """SHA-256 over every input that determines the synthesized samples."""
    payload = {
        'scenario': asdict(scenario),
        'params': asdict(params),
        'constants': asdict(constants or PhysicalConstants()),
        'detector': asdict(detector),
        'seed': seed,
        'chunk_samples': chunk_samples,
    }
    encoded = json.dumps(payload, sort_keys=True, default=float).encode('utf-8')
    return hashlib.sha256(encoded).hexdigest()


def clean_voltage(
    trajectory: PopulationTrajectory,
    params: NVEnsembleParams,
    detector: DetectorModel,
    gamma_p: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Noiseless photovoltage and photon rate along a trajectory."""
    rate = np.atleast_1d(fluorescence_rate(trajectory.p0_values, params, gamma_p))
    return detector.volts(rate), rate


def synthesize_trace(
    scenario: DriveScenario,
    params: NVEnsembleParams,
    detector: DetectorModel,
    duration: Optional[float] = None,
    seed: int = 0,
    constants: Optional[PhysicalConstants] = None,
    chunk_samples: int = DEFAULT_CHUNK_SAMPLES,
    simplified_envelope: bool = False
) -> TimeTrace:
    """
    Simulate the photodetector voltage for a drive scenario.

    Args:
        scenario: Tones, laser power and gating
        params: Ensemble parameters
        detector: Detector responsivity, noise and sample rate
        duration: Record length in s (defaults to the scenario duration)
        seed: Noise seed; identical inputs and seed give identical samples
        constants: Physical constants
        chunk_samples: Samples per independently seeded noise chunk
        simplified_envelope: Use the first-order two-tone relaxation

    Returns:
        TimeTrace of round(duration * sample_rate) samples

    Raises:
        AliasingError: If sample_rate <= 2 * the highest beat frequency
    """
    constants = constants or PhysicalConstants()
    duration = scenario.duration if duration is None else duration
    if not duration > 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    beat = scenario.max_beat_frequency
    if detector.sample_rate <= 2.0 * beat:
        raise AliasingError(detector.sample_rate, beat)
    scenario = replace(scenario, duration=duration)

    trajectory = integrate_rate_equations(
        scenario, params, constants=constants,
        output_interval=1.0 / detector.sample_rate,
        simplified_envelope=simplified_envelope,
    )
    gamma_p = pump_rate(scenario.laser_power, params)
    volts, rate = clean_voltage(trajectory, params, detector, gamma_p)
    if not detector.is_noiseless:
        check_shot_noise_validity(detector, float(np.mean(rate)))
        volts = add_detector_noise(detector, volts, rate, seed, chunk_samples)

    fingerprint = scenario_fingerprint(scenario, params, detector, seed, constants, chunk_samples)
    logger.info(
        f"Synthesized trace | samples={volts.size} | sample_rate={detector.sample_rate:g} | "
        f"tones={len(scenario.tones)} | seed={seed} | fingerprint={fingerprint[:12]}"
    )
    return TimeTrace(
        sample_rate=detector.sample_rate,
        samples=volts,
        seed=seed,
        fingerprint=fingerprint,
        metadata={
            'gamma_p': gamma_p,
            'step_s': trajectory.step,
            'substeps': trajectory.substeps,
            'chunk_samples': chunk_samples,
        },
    )


def direct_detection_drop(trace: TimeTrace, gate_on: float, settle_time: float,
                          gate_off: Optional[float] = None) -> float:
    """
    Photovoltage drop between microwave-off and settled microwave-on segments.

    Averages the record before ``gate_on`` and the window from
    ``gate_on + settle_time`` to ``gate_off`` (or the end of the record).

    Raises:
        ValueError: If either averaging window is empty
    """
    times = trace.times
    stop = trace.duration if gate_off is None else gate_off
    before = trace.samples[times < gate_on]
    during = trace.samples[(times >= gate_on + settle_time) & (times < stop)]
    if before.size == 0 or during.size == 0:
        raise ValueError(
            f"empty averaging window: {before.size} samples before gate_on, {during.size} after settling"
        )
    return float(np.mean(before) - np.mean(during))
