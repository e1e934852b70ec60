"""Microwave drive tones and reference-tone grids."""
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .constants import PhysicalConstants
from .rates import rabi_frequency


TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MicrowaveTone:
    """A microwave tone b*cos(2*pi*f*t + phase)."""
    amplitude_b: float    # tesla
    frequency: float      # Hz
    phase: float = 0.0    # rad, normalized to [0, 2*pi)

    def __post_init__(self):
        if not self.amplitude_b >= 0:
            raise ValueError(f"amplitude_b must be >= 0, got {self.amplitude_b}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be > 0, got {self.frequency}")
        object.__setattr__(self, 'phase', float(self.phase) % TWO_PI)

    def rabi_frequency(self, constants: Optional[PhysicalConstants] = None) -> float:
        return rabi_frequency(self.amplitude_b, constants)


@dataclass(frozen=True)
class ReferenceGrid:
    """
    Regular comb of reference tones.

    Tones sit at ``center + offset + (k - (channels - 1) / 2) * spacing``.
    """
    center: float                 # Hz
    spacing: float                # Hz
    channels: int = 1
    offset: float = 0.0           # Hz

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")

    @property
    def frequencies(self) -> np.ndarray:
        k = np.arange(self.channels) - (self.channels - 1) / 2.0
        return self.center + self.offset + k * self.spacing

    @property
    def span(self) -> float:
        """Frequency range covered, including the half-spacing at each edge."""
        return self.channels * self.spacing

    def tones(self, amplitude_b: float, phases: Optional[List[float]] = None) -> List[MicrowaveTone]:
        """Expand the grid into tones of equal amplitude."""
        freqs = self.frequencies
        if phases is None:
            phases = [0.0] * len(freqs)
        if len(phases) != len(freqs):
            raise ValueError(f"expected {len(freqs)} phases, got {len(phases)}")
        return [MicrowaveTone(amplitude_b, float(f), float(p)) for f, p in zip(freqs, phases)]

    def nearest_tone(self, frequency: float) -> float:
        freqs = self.frequencies
        return float(freqs[np.argmin(np.abs(freqs - frequency))])
