"""Beat-peak linewidth from a zoomed power spectrum."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..repository.models import TimeTrace
from .spectrum import zoom_spectrum
from .fitting import FitResult, DegenerateDataError, lorentzian_multifit

logger = logging.getLogger(__name__)

# Fraction of the peak power that delimits the fitted main lobe
LOBE_LEVEL = 0.3
DEFAULT_POINTS = 129


@dataclass(frozen=True)
class LinewidthEstimate:
    center: float
    fwhm: float
    duration: float
    result: FitResult

    @property
    def fwhm_times_duration(self) -> float:
        return self.fwhm * self.duration


def beat_linewidth(
    trace: TimeTrace,
    f_center: float,
    span: Optional[float] = None,
    points: int = DEFAULT_POINTS,
    window: str = 'rectangular'
) -> LinewidthEstimate:
    """
    FWHM of a Lorentzian fitted to the main lobe of the beat-peak power spectrum.

    The power |X(f)|^2 is sampled on a zoomed grid of ``span`` (default
    20/duration) around f_center; the contiguous region around the
    maximum above 30% of the peak is fitted. For a rectangular window the
    result is close to 1/duration.

    Raises:
        DegenerateDataError: If the lobe holds too few points to fit
    """
    duration = trace.duration
    span = 20.0 / duration if span is None else span
    f_lo = max(f_center - 0.5 * span, 0.0)
    f_hi = min(f_center + 0.5 * span, 0.5 * trace.sample_rate)
    spectrum = zoom_spectrum(trace, f_lo, f_hi, points=points, window=window)
    power = spectrum.amplitudes ** 2
    freqs = spectrum.bin_frequencies

    top = int(np.argmax(power))
    threshold = LOBE_LEVEL * power[top]
    lo = top
    while lo > 0 and power[lo - 1] >= threshold:
        lo -= 1
    hi = top
    while hi < power.size - 1 and power[hi + 1] >= threshold:
        hi += 1
    if hi - lo + 1 < 4:
        raise DegenerateDataError(
            f"main lobe holds {hi - lo + 1} points; increase points or reduce span"
        )

    guess = [(float(freqs[top]), max(float(freqs[hi] - freqs[lo]), spectrum.resolution), float(power[top]))]
    fit = lorentzian_multifit(freqs[lo:hi + 1], power[lo:hi + 1], 1, init=guess, offset=0.0)
    peak = fit.peaks[0]
    logger.info(
        f"Beat linewidth | center={peak.center:.6f} | fwhm={peak.fwhm:.4g} | "
        f"fwhm_times_duration={peak.fwhm * duration:.4f}"
    )
    return LinewidthEstimate(center=peak.center, fwhm=peak.fwhm, duration=duration, result=fit.result)
