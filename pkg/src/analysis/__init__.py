"""
Trace analysis: spectra, peaks and SNR, curve fits, linewidths and
multi-grid frequency disambiguation.
"""
from .spectrum import amplitude_spectrum, zoom_spectrum, spectrum_mean_square
from .peaks import PeakEstimate, peak_snr, baseline_rms, find_peaks
from .fitting import (
    DegenerateDataError,
    FitResult,
    LorentzianPeak,
    LorentzianFit,
    ResponsivityFit,
    levenberg_marquardt,
    lorentzian,
    lorentzian_multifit,
    fit_exponential,
    exponential_rate_fit,
    power_law_fit,
    responsivity_fit,
    fit_report,
)
from .linewidth import LinewidthEstimate, beat_linewidth
from .disambiguation import GridMeasurement, fold_frequency, alias_comb, disambiguate_frequency

__all__ = [
    'amplitude_spectrum',
    'zoom_spectrum',
    'spectrum_mean_square',
    'PeakEstimate',
    'peak_snr',
    'baseline_rms',
    'find_peaks',
    'DegenerateDataError',
    'FitResult',
    'LorentzianPeak',
    'LorentzianFit',
    'ResponsivityFit',
    'levenberg_marquardt',
    'lorentzian',
    'lorentzian_multifit',
    'fit_exponential',
    'exponential_rate_fit',
    'power_law_fit',
    'responsivity_fit',
    'fit_report',
    'LinewidthEstimate',
    'beat_linewidth',
    'GridMeasurement',
    'fold_frequency',
    'alias_comb',
    'disambiguate_frequency',
]
