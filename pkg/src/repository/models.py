"""Data models for simulation artifacts: population trajectories, traces and spectra."""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Any, Optional, Union

import numpy as np


@dataclass(frozen=True)
class PopulationTrajectory:
    """Uniformly sampled P0(t) produced by the rate-equation integrator."""
    times: np.ndarray
    p0_values: np.ndarray
    step: float
    method: str = "rk4"
    substeps: int = 1

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.p0_values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ValueError(f"times and p0_values must be 1-D of equal length, got {times.shape} and {values.shape}")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'p0_values', values)

    @property
    def output_interval(self) -> float:
        return self.step * self.substeps

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write (time_s, p0) rows for debugging."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['time_s', 'p0'])
            for t, p in zip(self.times, self.p0_values):
                writer.writerow([repr(float(t)), repr(float(p))])
        return path


@dataclass(frozen=True)
class TimeTrace:
    """Uniformly sampled photovoltage record."""
    sample_rate: float
    samples: np.ndarray
    seed: Optional[int] = None
    fingerprint: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))


@dataclass(frozen=True)
class Spectrum:
    """
    One-sided spectrum on a uniform frequency grid.

    For Fourier spectra ``amplitudes`` are sinusoid-amplitude normalized:
    a unit-amplitude tone at a bin center reads 1.
    """
    bin_frequencies: np.ndarray
    amplitudes: np.ndarray
    duration: float
    window: str = "rectangular"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.array(self.bin_frequencies, dtype=float)
        amps = np.array(self.amplitudes, dtype=float)
        if freqs.shape != amps.shape or freqs.ndim != 1 or freqs.size == 0:
            raise ValueError("bin_frequencies and amplitudes must be non-empty 1-D arrays of equal length")
        if freqs.size > 2:
            steps = np.diff(freqs)
            if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0) or steps[0] <= 0:
                raise ValueError("bin_frequencies must be uniform and increasing")
        freqs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, 'bin_frequencies', freqs)
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def resolution(self) -> float:
        if self.bin_frequencies.size < 2:
            return 0.0
        return float(self.bin_frequencies[1] - self.bin_frequencies[0])

    def index_of(self, frequency: float) -> int:
        return int(np.argmin(np.abs(self.bin_frequencies - frequency)))

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Write (freq_hz, amplitude_v) rows."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['freq_hz', 'amplitude_v'])
            for f, a in zip(self.bin_frequencies, self.amplitudes):
                writer.writerow([repr(float(f)), repr(float(a))])
        return path
