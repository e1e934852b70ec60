"""Recovering a signal frequency from beat measurements on several reference grids."""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridMeasurement:
    """
    Beat frequency measured against an infinite comb offset + k*spacing.

    Only the distance to the nearest comb tone is observable, so the
    measured beat lies in [0, spacing/2].
    """
    spacing: float
    offset: float
    measured_beat: float
    uncertainty: float = 0.0

    def __post_init__(self):
        errors = []
        if not self.spacing > 0:
            errors.append(f"spacing must be > 0, got {self.spacing}")
        if not 0 <= self.measured_beat <= 0.5 * self.spacing:
            errors.append(f"measured_beat must be in [0, spacing/2], got {self.measured_beat}")
        if not self.uncertainty >= 0:
            errors.append(f"uncertainty must be >= 0, got {self.uncertainty}")
        if errors:
            raise ValueError("Invalid grid measurement:\n  - " + "\n  - ".join(errors))

    @classmethod
    def observe(cls, frequency: float, spacing: float, offset: float = 0.0,
                uncertainty: float = 0.0) -> 'GridMeasurement':
        """Noiseless measurement of ``frequency`` against the comb."""
        return cls(spacing, offset, float(fold_frequency(frequency, spacing, offset)), uncertainty)


def fold_frequency(f, spacing: float, offset: float = 0.0):
    """Distance from f to the nearest tone of the comb offset + k*spacing."""
    if not spacing > 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    remainder = np.mod(np.asarray(f, dtype=float) - offset, spacing)
    folded = np.minimum(remainder, spacing - remainder)
    return float(folded) if folded.ndim == 0 else folded


def alias_comb(measurement: GridMeasurement, band: Tuple[float, float]) -> np.ndarray:
    """All frequencies in the band that fold onto the measured beat exactly."""
    lo, hi = band
    s, beat = measurement.spacing, measurement.measured_beat
    k = np.arange(np.floor((lo - measurement.offset - beat) / s) - 1,
                  np.ceil((hi - measurement.offset + beat) / s) + 2)
    tones = measurement.offset + k * s
    candidates = np.concatenate([tones - beat, tones + beat])
    candidates = candidates[(candidates >= lo) & (candidates <= hi)]
    return np.unique(candidates)


def _merge_close(values: np.ndarray, tolerance: float) -> List[float]:
    merged: List[float] = []
    for value in np.sort(values):
        if merged and value - merged[-1] <= tolerance:
            continue
        merged.append(float(value))
    return merged


def disambiguate_frequency(
    measurements: Sequence[GridMeasurement],
    search_band: Tuple[float, float],
    tolerance: float
) -> List[float]:
    """
    Frequencies in the band consistent with every grid measurement.

    Candidates are the exact aliases of the finest-spaced measurement;
    each is kept when it folds onto every other measurement within
    ``tolerance`` plus that measurement's uncertainty.

    Args:
        measurements: One or more grid measurements
        search_band: (low, high) frequency band, inclusive
        tolerance: Allowed folding mismatch, same units as the frequencies

    Returns:
        Sorted candidate frequencies; empty when the measurements disagree

    Raises:
        ValueError: On an empty measurement list, a bad band or negative tolerance
    """
    if not measurements:
        raise ValueError("at least one measurement is required")
    lo, hi = search_band
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError(f"search_band must be finite with low < high, got {search_band}")
    if not tolerance >= 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    spacings = [m.spacing for m in measurements]
    if len(set(spacings)) < len(spacings):
        logger.warning(f"Repeated grid spacings add no information | spacings={spacings}")

    anchor = min(measurements, key=lambda m: m.spacing)
    candidates = alias_comb(anchor, (lo, hi))
    keep = np.ones(candidates.size, dtype=bool)
    for measurement in measurements:
        mismatch = np.abs(fold_frequency(candidates, measurement.spacing, measurement.offset)
                          - measurement.measured_beat)
        keep &= np.atleast_1d(mismatch) <= tolerance + measurement.uncertainty + anchor.uncertainty
    result = _merge_close(candidates[keep], max(tolerance, 1e-12 * max(abs(lo), abs(hi))))
    if not result:
        logger.warning(f"No frequency consistent with all measurements | count={len(measurements)} | band={search_band}")
    else:
        logger.debug(f"Disambiguated frequency | candidates={len(result)} | measurements={len(measurements)}")
    return result
