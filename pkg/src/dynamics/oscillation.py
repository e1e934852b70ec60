"""Extraction of the steady-state beat oscillation from an integrated trajectory."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..repository.models import PopulationTrajectory

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
MIN_TAIL_PERIODS = 10
MIN_SETTLING_TIMES = 5.0


class SettlingError(ValueError):
    """Raised when a trajectory is too short to contain a settled oscillation."""


@dataclass(frozen=True)
class OscillationFit:
    """P0(t) ~ offset + amplitude*cos(2*pi*frequency*t + phase) over the fitted tail."""
    amplitude: float
    frequency: float
    phase: float
    offset: float
    residual_rms: float
    tail_start: float


def steady_state_oscillation(
    trajectory: PopulationTrajectory,
    delta: float,
    relaxation_rate: Optional[float] = None,
    tail_fraction: float = 0.2
) -> OscillationFit:
    """
    Fit offset plus a sinusoid at the beat frequency to the trajectory tail.

    Args:
        trajectory: Integrated P0(t)
        delta: Beat frequency in Hz
        relaxation_rate: Decay rate of transients in s^-1; when given the
            tail must start at least 5 relaxation times into the record
        tail_fraction: Fraction of the record used for the fit

    Returns:
        OscillationFit

    Raises:
        ValueError: If delta is zero or tail_fraction is outside (0, 1]
        SettlingError: If the tail holds fewer than 10 beat periods or
            starts before transients have decayed
    """
    if delta == 0:
        raise ValueError("delta must be non-zero: there is no oscillation to extract")
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    frequency = abs(delta)
    times = trajectory.times
    duration = float(times[-1] - times[0])
    tail_start = float(times[0] + (1.0 - tail_fraction) * duration)

    errors = []
    if (duration - (tail_start - times[0])) * frequency < MIN_TAIL_PERIODS:
        errors.append(
            f"tail spans {(times[-1] - tail_start) * frequency:.3g} beat periods, "
            f"need at least {MIN_TAIL_PERIODS}"
        )
    if relaxation_rate is not None:
        if not relaxation_rate > 0:
            raise ValueError(f"relaxation_rate must be > 0, got {relaxation_rate}")
        if tail_start - times[0] < MIN_SETTLING_TIMES / relaxation_rate:
            errors.append(
                f"tail starts at {tail_start - times[0]:.4g} s, before "
                f"{MIN_SETTLING_TIMES:g} relaxation times ({MIN_SETTLING_TIMES / relaxation_rate:.4g} s)"
            )
    if errors:
        raise SettlingError("Trajectory has not settled:\n  - " + "\n  - ".join(errors))

    mask = times >= tail_start
    t_tail = times[mask]
    angle = TWO_PI * np.mod(frequency * t_tail, 1.0)
    design = np.column_stack([np.cos(angle), np.sin(angle), np.ones_like(t_tail)])
    coeffs, _, _, _ = np.linalg.lstsq(design, trajectory.p0_values[mask], rcond=None)
    cos_coeff, sin_coeff, offset = coeffs
    residual = trajectory.p0_values[mask] - design @ coeffs

    fit = OscillationFit(
        amplitude=float(math.hypot(cos_coeff, sin_coeff)),
        frequency=frequency,
        phase=float(math.atan2(-sin_coeff, cos_coeff) % TWO_PI),
        offset=float(offset),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        tail_start=tail_start,
    )
    logger.debug(
        f"Fitted steady-state oscillation | amplitude={fit.amplitude:.4g} | "
        f"phase={fit.phase:.4f} | samples={t_tail.size}"
    )
    return fit
