"""Drive scenarios: tone sets, laser power, duration and microwave gating."""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Sequence

import numpy as np

from ..physics.constants import NVEnsembleParams, PhysicalConstants
from ..physics.tones import MicrowaveTone

logger = logging.getLogger(__name__)

# Tones further than this many gamma2 from the line must be flagged off-resonant
RESONANCE_WINDOW = 10.0


@dataclass(frozen=True)
class GatingSchedule:
    """Microwave-on windows [(start_s, stop_s), ...]; microwaves are off elsewhere."""
    windows: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        windows = tuple((float(a), float(b)) for a, b in self.windows)
        for start, stop in windows:
            if not 0 <= start < stop:
                raise ValueError(f"gating window must satisfy 0 <= start < stop, got ({start}, {stop})")
        object.__setattr__(self, 'windows', tuple(sorted(windows)))

    def is_on(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        on = np.zeros(t.shape, dtype=bool)
        for start, stop in self.windows:
            on |= (t >= start) & (t < stop)
        return on


@dataclass(frozen=True)
class DriveScenario:
    """
    A set of microwave tones applied under continuous laser illumination.

    The smallest-amplitude tone of a multi-tone set is the signal.
    """
    tones: Tuple[MicrowaveTone, ...]
    laser_power: float
    duration: float
    initial_p0: Optional[float] = None
    line_center: Optional[float] = None
    gating: Optional[GatingSchedule] = None
    allow_off_resonant: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'tones', tuple(self.tones))
        if not self.laser_power >= 0:
            raise ValueError(f"laser_power must be >= 0, got {self.laser_power}")
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if self.initial_p0 is not None and not 0.0 <= self.initial_p0 <= 1.0:
            raise ValueError(f"initial_p0 must be in [0, 1], got {self.initial_p0}")

    @property
    def frame_frequency(self) -> float:
        """Rotating-frame frequency; tone phases are evaluated relative to it."""
        if self.line_center is not None:
            return self.line_center
        if self.tones:
            return self.tones[0].frequency
        return 0.0

    @property
    def signal_index(self) -> Optional[int]:
        if len(self.tones) < 2:
            return None
        return int(np.argmin([tone.amplitude_b for tone in self.tones]))

    @property
    def signal_tone(self) -> Optional[MicrowaveTone]:
        index = self.signal_index
        return None if index is None else self.tones[index]

    @property
    def max_beat_frequency(self) -> float:
        if len(self.tones) < 2:
            return 0.0
        freqs = np.array([tone.frequency for tone in self.tones])
        return float(freqs.max() - freqs.min())

    def microwave_on(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.gating is None:
            return np.ones(t.shape, dtype=bool)
        return self.gating.is_on(t)

    def mean_relaxation(self, params: NVEnsembleParams,
                        constants: Optional[PhysicalConstants] = None) -> float:
        """Time-averaged microwave-induced relaxation with all tones on: sum of per-tone rates."""
        constants = constants or PhysicalConstants()
        total_b2 = sum(tone.amplitude_b ** 2 for tone in self.tones)
        return constants.gamma_nv ** 2 * total_b2 / (2.0 * params.gamma2)

    def validate(self, params: NVEnsembleParams) -> None:
        """
        Check the tones against the ensemble line.

        Raises:
            ValueError: If a tone lies outside the resonance window and the
                scenario does not allow off-resonant tones
        """
        if self.allow_off_resonant or not self.tones or self.line_center is None:
            return
        limit = RESONANCE_WINDOW * params.gamma2
        for index, tone in enumerate(self.tones):
            if abs(tone.frequency - self.line_center) > limit:
                raise ValueError(
                    f"tone {index} at {tone.frequency} Hz is more than {RESONANCE_WINDOW:g}*gamma2 "
                    f"from the line at {self.line_center} Hz; set allow_off_resonant to accept it"
                )


def dual_tone_scenario(
    signal_b: float,
    reference_b: float,
    delta: float,
    laser_power: float,
    duration: float,
    line_center: float = 2.9039e9,
    phi: float = 0.0,
    gating: Optional[GatingSchedule] = None,
    initial_p0: Optional[float] = None
) -> DriveScenario:
    """Signal on the line plus a reference detuned by the beat ``delta``."""
    tones = [MicrowaveTone(reference_b, line_center + delta, phi)]
    if signal_b > 0:
        tones.append(MicrowaveTone(signal_b, line_center, 0.0))
    return DriveScenario(
        tones=tuple(tones),
        laser_power=laser_power,
        duration=duration,
        initial_p0=initial_p0,
        line_center=line_center,
        gating=gating,
    )


def tone_offsets(tones: Sequence[MicrowaveTone], frame_frequency: float) -> np.ndarray:
    """Tone frequencies relative to the rotating frame, Hz."""
    return np.array([tone.frequency - frame_frequency for tone in tones], dtype=float)
