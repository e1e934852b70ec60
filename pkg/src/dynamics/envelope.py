"""Microwave interference envelopes and the relaxation rate they induce."""
import math
from typing import Optional, Sequence

import numpy as np

from ..physics.constants import PhysicalConstants
from ..physics.tones import MicrowaveTone
from .scenario import tone_offsets

TWO_PI = 2.0 * math.pi


def _beat_angle(offset_hz, t, phase):
    # Reduce cycles mod 1 before scaling so long records keep phase precision
    return TWO_PI * np.mod(offset_hz * t, 1.0) + phase


def interference_envelope(
    reference: MicrowaveTone,
    signal: MicrowaveTone,
    t,
    simplified: bool = False
):
    """
    Magnitude of the summed reference and signal fields.

    The exact envelope is sqrt(B1^2 + b1^2 + 2*B1*b1*cos(2*pi*delta*t + phi)),
    with delta the frequency of the reference minus that of the signal and
    phi their phase difference. ``simplified`` drops the b1^2 term.

    Raises:
        ValueError: If the signal is stronger than the reference
    """
    if signal.amplitude_b > reference.amplitude_b:
        raise ValueError(
            f"signal amplitude {signal.amplitude_b} exceeds reference amplitude {reference.amplitude_b}"
        )
    big_b, small_b = reference.amplitude_b, signal.amplitude_b
    angle = _beat_angle(reference.frequency - signal.frequency, np.asarray(t, dtype=float),
                        reference.phase - signal.phase)
    square = big_b ** 2 + 2.0 * big_b * small_b * np.cos(angle)
    if not simplified:
        square = square + small_b ** 2
    envelope = np.sqrt(np.maximum(square, 0.0))
    return float(envelope) if envelope.ndim == 0 else envelope


def complex_envelope(tones: Sequence[MicrowaveTone], t, frame_frequency: float) -> np.ndarray:
    """Sum of tone phasors in a frame rotating at ``frame_frequency``, tesla."""
    t = np.asarray(t, dtype=float)
    envelope = np.zeros(t.shape, dtype=complex)
    for tone, offset in zip(tones, tone_offsets(tones, frame_frequency)):
        envelope += tone.amplitude_b * np.exp(1j * _beat_angle(offset, t, tone.phase))
    return envelope


def instantaneous_relaxation(
    tones: Sequence[MicrowaveTone],
    gamma2: float,
    t,
    constants: Optional[PhysicalConstants] = None,
    simplified: bool = False,
    frame_frequency: Optional[float] = None
):
    """
    Microwave-induced relaxation rate at time t.

    The general form squares the full envelope, [gamma_nv*|E(t)|/sqrt(2)]^2 / gamma2.
    With two tones and ``simplified`` set, the first-order form
    gamma_G + 2*sqrt(gamma_G*gamma_g)*cos(2*pi*delta*t + phi) is returned.

    Raises:
        ValueError: If gamma2 is not positive
    """
    if not gamma2 > 0:
        raise ValueError(f"gamma2 must be > 0, got {gamma2}")
    constants = constants or PhysicalConstants()
    t = np.asarray(t, dtype=float)
    scale = constants.gamma_nv ** 2 / (2.0 * gamma2)
    if not tones:
        rate = np.zeros(t.shape)
    elif simplified and len(tones) == 2:
        reference, signal = sorted(tones, key=lambda tone: tone.amplitude_b, reverse=True)
        gamma_big_g = scale * reference.amplitude_b ** 2
        gamma_g = scale * signal.amplitude_b ** 2
        angle = _beat_angle(reference.frequency - signal.frequency, t, reference.phase - signal.phase)
        rate = gamma_big_g + 2.0 * math.sqrt(gamma_big_g * gamma_g) * np.cos(angle)
    elif len(tones) == 1:
        rate = np.full(t.shape, scale * tones[0].amplitude_b ** 2)
    else:
        frame = tones[0].frequency if frame_frequency is None else frame_frequency
        rate = scale * np.abs(complex_envelope(tones, t, frame)) ** 2
    return float(rate) if rate.ndim == 0 else rate
