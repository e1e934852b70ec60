"""Spectral peak estimation and signal-to-noise ratios."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy import signal

from ..repository.models import Spectrum

logger = logging.getLogger(__name__)

# Bins below this fraction of the strongest bin are rounding residue
PEAK_FLOOR_RATIO = 1e-9


@dataclass(frozen=True)
class PeakEstimate:
    """A spectral peak; ``fwhm`` is None until a lineshape has been fitted."""
    frequency: float
    amplitude: float
    snr: float
    fwhm: Optional[float] = None

    def __post_init__(self):
        if not self.snr >= 0:
            raise ValueError(f"snr must be >= 0, got {self.snr}")
        if self.fwhm is not None and not self.fwhm > 0:
            raise ValueError(f"fwhm must be > 0 when fitted, got {self.fwhm}")


def peak_snr(spectrum: Spectrum, f_center: float, signal_span: float, noise_span: float) -> PeakEstimate:
    """
    Peak amplitude near f_center over the RMS of the surrounding baseline.

    The signal window is |f - f_center| <= signal_span/2 (at least the
    nearest bin); the baseline is every other bin with
    |f - f_center| <= noise_span/2 except DC. A noiseless peak has snr = inf.

    Raises:
        ValueError: If f_center is outside the spectrum or the baseline window is empty
    """
    freqs = spectrum.bin_frequencies
    if not freqs[0] <= f_center <= freqs[-1]:
        raise ValueError(f"f_center {f_center} outside spectrum range [{freqs[0]}, {freqs[-1]}]")
    distance = np.abs(freqs - f_center)
    in_signal = distance <= 0.5 * signal_span
    in_signal[int(np.argmin(distance))] = True
    in_noise = (distance <= 0.5 * noise_span) & ~in_signal
    in_noise[freqs == 0.0] = False
    if not np.any(in_noise):
        raise ValueError(
            f"noise window is empty: noise_span {noise_span} Hz holds no bins outside signal_span {signal_span} Hz"
        )

    signal_amps = np.where(in_signal, spectrum.amplitudes, -np.inf)
    index = int(np.argmax(signal_amps))
    amplitude = float(spectrum.amplitudes[index])
    baseline_rms = float(np.sqrt(np.mean(spectrum.amplitudes[in_noise] ** 2)))
    if baseline_rms == 0:
        snr = math.inf if amplitude > 0 else 0.0
    else:
        snr = amplitude / baseline_rms
    return PeakEstimate(frequency=float(freqs[index]), amplitude=amplitude, snr=snr)


def baseline_rms(spectrum: Spectrum) -> float:
    """
    Robust RMS of the noise baseline, excluding the DC bin.

    Uses the median, which for Rayleigh-distributed bin magnitudes equals
    rms * sqrt(ln 2).
    """
    amplitudes = spectrum.amplitudes[1:]
    if amplitudes.size == 0:
        return 0.0
    return float(np.median(amplitudes) / math.sqrt(math.log(2.0)))


def find_peaks(
    spectrum: Spectrum,
    threshold_snr: float = 5.0,
    min_frequency: Optional[float] = None,
    max_frequency: Optional[float] = None,
    max_peaks: Optional[int] = None
) -> List[PeakEstimate]:
    """
    Local maxima standing above the baseline by at least ``threshold_snr``.

    The DC bin and bins below a rounding floor relative to the strongest
    bin never count, so a constant trace yields no peaks.

    Returns:
        Peaks sorted by decreasing amplitude
    """
    amplitudes = spectrum.amplitudes
    freqs = spectrum.bin_frequencies
    floor = PEAK_FLOOR_RATIO * float(np.max(np.abs(amplitudes)))
    rms = baseline_rms(spectrum)

    indices, _ = signal.find_peaks(amplitudes)
    peaks = []
    for index in indices:
        if index == 0 or amplitudes[index] <= floor:
            continue
        f = float(freqs[index])
        if min_frequency is not None and f < min_frequency:
            continue
        if max_frequency is not None and f > max_frequency:
            continue
        snr = math.inf if rms <= floor else float(amplitudes[index] / rms)
        if snr >= threshold_snr:
            peaks.append(PeakEstimate(frequency=f, amplitude=float(amplitudes[index]), snr=snr))
    peaks.sort(key=lambda peak: peak.amplitude, reverse=True)
    if max_peaks is not None:
        peaks = peaks[:max_peaks]
    logger.debug(f"Found spectral peaks | count={len(peaks)} | threshold_snr={threshold_snr}")
    return peaks
