"""Sinusoid-amplitude normalized Fourier spectra of photovoltage traces."""
import logging
import math
from typing import Optional

import numpy as np
from scipy import signal

from ..repository.models import TimeTrace, Spectrum

logger = logging.getLogger(__name__)

MIN_SAMPLES = 16
WINDOWS = ('rectangular', 'hann')
DEFAULT_ZOOM_CHUNK = 1 << 20


def _check_trace(trace: TimeTrace) -> None:
    if trace.samples.size < MIN_SAMPLES:
        raise ValueError(f"trace must hold at least {MIN_SAMPLES} samples, got {trace.samples.size}")
    if not trace.is_finite():
        raise ValueError("trace contains non-finite samples")


def _window(name: str, n: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Samples [start, stop) of an n-point periodic window."""
    stop = n if stop is None else stop
    if name == 'rectangular':
        return np.ones(stop - start)
    if name == 'hann':
        k = np.arange(start, stop)
        return 0.5 - 0.5 * np.cos(2.0 * math.pi * k / n)
    raise ValueError(f"window must be one of {WINDOWS}, got '{name}'")


def _coherent_gain(name: str, n: int) -> float:
    return float(n) if name == 'rectangular' else 0.5 * n


def amplitude_spectrum(trace: TimeTrace, window: str = 'rectangular') -> Spectrum:
    """
    One-sided amplitude spectrum of a trace.

    A unit-amplitude sinusoid centered on a bin reads 1.0; the DC bin
    reads the mean.

    Args:
        trace: Input trace, at least 16 finite samples
        window: 'rectangular' (default) or 'hann'

    Returns:
        Spectrum on the rfft grid with ``resolution = 1/duration``

    Raises:
        ValueError: On short or non-finite traces, or an unknown window
    """
    _check_trace(trace)
    n = trace.samples.size
    weights = _window(window, n)
    transform = np.fft.rfft(trace.samples * weights)
    amplitudes = 2.0 * np.abs(transform) / _coherent_gain(window, n)
    amplitudes[0] *= 0.5
    if n % 2 == 0:
        amplitudes[-1] *= 0.5
    freqs = np.fft.rfftfreq(n, d=1.0 / trace.sample_rate)
    return Spectrum(
        bin_frequencies=freqs,
        amplitudes=amplitudes,
        duration=trace.duration,
        window=window,
        metadata={'normalization': 'sinusoid_amplitude', 'n_samples': n, 'linewidth_convention': 'amplitude_fwhm'},
    )


def spectrum_mean_square(spectrum: Spectrum) -> float:
    """
    Mean squared trace value recovered from a rectangular-window amplitude spectrum.

    DC and Nyquist bins carry their full power; every other bin holds a
    sinusoid of mean square amplitude^2 / 2.
    """
    amplitudes = spectrum.amplitudes
    n = spectrum.metadata.get('n_samples')
    total = amplitudes[0] ** 2 + 0.5 * np.sum(amplitudes[1:] ** 2)
    if n is not None and n % 2 == 0:
        total += 0.5 * amplitudes[-1] ** 2
    return float(total)


def zoom_spectrum(
    trace: TimeTrace,
    f_lo: float,
    f_hi: float,
    points: int = 256,
    window: str = 'rectangular',
    remove_mean: bool = True,
    chunk_samples: int = DEFAULT_ZOOM_CHUNK
) -> Spectrum:
    """
    Amplitude spectrum on a fine grid between f_lo and f_hi (inclusive).

    The DFT is evaluated chunk by chunk with ``scipy.signal.zoom_fft`` and
    the partial transforms are phase-shifted to the chunk start and
    summed, so long records are handled without a full-length transform.

    Raises:
        ValueError: On an empty or out-of-range band or too few points
    """
    _check_trace(trace)
    nyquist = 0.5 * trace.sample_rate
    if not 0 <= f_lo < f_hi <= nyquist:
        raise ValueError(f"band must satisfy 0 <= f_lo < f_hi <= {nyquist}, got ({f_lo}, {f_hi})")
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")

    n = trace.samples.size
    samples = trace.samples - np.mean(trace.samples) if remove_mean else trace.samples
    freqs = np.linspace(f_lo, f_hi, points)
    transform = np.zeros(points, dtype=complex)
    for start in range(0, n, chunk_samples):
        stop = min(start + chunk_samples, n)
        chunk = samples[start:stop] * _window(window, n, start, stop)
        if chunk.size == 1:
            partial = np.full(points, chunk[0], dtype=complex)
        else:
            partial = signal.zoom_fft(chunk, [f_lo, f_hi], m=points, fs=trace.sample_rate, endpoint=True)
        cycles = np.mod(freqs * (start / trace.sample_rate), 1.0)
        transform += partial * np.exp(-2j * math.pi * cycles)

    amplitudes = 2.0 * np.abs(transform) / _coherent_gain(window, n)
    return Spectrum(
        bin_frequencies=freqs,
        amplitudes=amplitudes,
        duration=trace.duration,
        window=window,
        metadata={'normalization': 'sinusoid_amplitude', 'n_samples': n, 'zoom': True},
    )
