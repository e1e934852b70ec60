"""Seeded, chunked generation of shot, laser and electronic noise."""
import logging
from typing import Optional

import numpy as np

from .detector import DetectorModel, laser_noise_shape

logger = logging.getLogger(__name__)

SHOT_STREAM = 0
LASER_STREAM = 1
ELECTRONIC_STREAM = 2


def chunk_generator(seed: int, stream: int, chunk_index: int) -> np.random.Generator:
    """
    Counter-based generator keyed by (seed, stream, chunk).

    Chunks draw from independent Philox streams so they can be produced
    in any order, or in parallel, with identical results.
    """
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, chunk_index])))


def shaped_noise(n: int, sample_rate: float, psd, rng: np.random.Generator) -> np.ndarray:
    """
    Gaussian noise with one-sided PSD ``psd(f)`` by FFT shaping of unit white noise.

    Unit-variance white noise has a one-sided PSD of 2/fs, so each rfft
    bin is scaled by sqrt(psd(f) * fs / 2).
    """
    if n < 1:
        return np.zeros(0)
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spectrum *= np.sqrt(np.asarray(psd(freqs), dtype=float) * sample_rate / 2.0)
    return np.fft.irfft(spectrum, n=n)


def shot_noise_chunk(detector: DetectorModel, photon_rate: np.ndarray, seed: int, chunk_index: int) -> np.ndarray:
    """Voltage shot noise: photon count std sqrt(R*dt) per sample, mapped to volts."""
    rng = chunk_generator(seed, SHOT_STREAM, chunk_index)
    std_volts = detector.volts_per_photon_rate * np.sqrt(np.maximum(photon_rate, 0.0) * detector.sample_rate)
    return std_volts * rng.standard_normal(photon_rate.size)


def laser_noise_chunk(detector: DetectorModel, clean_volts: np.ndarray, seed: int, chunk_index: int) -> np.ndarray:
    """Multiplicative intensity noise with the detector's corner-flattened 1/f^alpha shape."""
    rng = chunk_generator(seed, LASER_STREAM, chunk_index)
    relative = shaped_noise(clean_volts.size, detector.sample_rate,
                            lambda f: laser_noise_shape(detector, f), rng)
    return detector.laser_noise_fraction * clean_volts * relative


def electronic_noise_chunk(detector: DetectorModel, n: int, seed: int, chunk_index: int) -> np.ndarray:
    rng = chunk_generator(seed, ELECTRONIC_STREAM, chunk_index)
    return detector.electronic_noise_density * np.sqrt(detector.sample_rate / 2.0) * rng.standard_normal(n)


def add_detector_noise(
    detector: DetectorModel,
    clean_volts: np.ndarray,
    photon_rate: np.ndarray,
    seed: int,
    chunk_samples: int,
    out: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Add all enabled noise sources to a clean voltage record, chunk by chunk.

    Args:
        detector: Detector model
        clean_volts: Noiseless photovoltage
        photon_rate: Instantaneous detected photon rate
        seed: Run seed
        chunk_samples: Samples per independently seeded chunk
        out: Optional output buffer

    Returns:
        Noisy voltage record
    """
    if chunk_samples < 1:
        raise ValueError(f"chunk_samples must be >= 1, got {chunk_samples}")
    out = np.array(clean_volts, dtype=float) if out is None else out
    n = clean_volts.size
    for chunk_index, start in enumerate(range(0, n, chunk_samples)):
        stop = min(start + chunk_samples, n)
        if detector.shot_noise:
            out[start:stop] += shot_noise_chunk(detector, photon_rate[start:stop], seed, chunk_index)
        if detector.laser_noise_fraction > 0:
            out[start:stop] += laser_noise_chunk(detector, clean_volts[start:stop], seed, chunk_index)
        if detector.electronic_noise_density > 0:
            out[start:stop] += electronic_noise_chunk(detector, stop - start, seed, chunk_index)
    logger.debug(f"Added detector noise | samples={n} | chunks={-(-n // chunk_samples)} | seed={seed}")
    return out
