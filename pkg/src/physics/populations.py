"""Closed-form solutions of the optically pumped two-level rate equations."""
import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)

# Perturbative validity of the heterodyne solution
WEAK_SIGNAL_RATIO = 1e-2


@dataclass(frozen=True)
class HeterodyneResponse:
    """Steady-state oscillation of P0: amplitude*cos(2*pi*frequency*t + phase)."""
    amplitude: float
    frequency: float
    phase: float


def _check_rates(**rates) -> None:
    for name, value in rates.items():
        if not np.all(np.asarray(value) >= 0):
            raise ValueError(f"{name} must be >= 0, got {value}")


def equilibrium_population(gamma_p, gamma1, gamma_g):
    """
    Equilibrium population of |0> under pumping and relaxation.

    P0 = 1/2 + gamma_p / (2 * (gamma_p + gamma1 + gamma_g))

    Args:
        gamma_p: Polarization rate
        gamma1: Intrinsic longitudinal relaxation rate
        gamma_g: Microwave-induced relaxation rate

    Returns:
        Population in [1/2, 1]

    Raises:
        ValueError: If a rate is negative or all rates are zero
    """
    _check_rates(gamma_p=gamma_p, gamma1=gamma1, gamma_g=gamma_g)
    total = np.asarray(gamma_p, dtype=float) + gamma1 + gamma_g
    if np.any(total <= 0):
        raise ValueError("equilibrium is undefined when all rates are zero")
    p0 = 0.5 + np.asarray(gamma_p, dtype=float) / (2.0 * total)
    return float(p0) if p0.ndim == 0 else p0


def transient_population(t, p0_initial: float, gamma_p: float, gamma1: float, gamma_g: float):
    """
    Population of |0> at time t after the rates were switched to the given values.

    Raises:
        ValueError: If t is negative or p0_initial is outside [0, 1]
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    if not 0.0 <= p0_initial <= 1.0:
        raise ValueError(f"p0_initial must be in [0, 1], got {p0_initial}")
    p_inf = equilibrium_population(gamma_p, gamma1, gamma_g)
    p0 = p_inf + (p0_initial - p_inf) * np.exp(-(gamma1 + gamma_g + gamma_p) * t)
    return float(p0) if p0.ndim == 0 else p0


def heterodyne_response(
    gamma_p: float,
    gamma1: float,
    gamma_big_g: float,
    gamma_g: float,
    delta: float,
    phi: float = 0.0
) -> HeterodyneResponse:
    """
    Linear response of P0 to a weak signal tone beating against a reference tone.

    The beat delta is an ordinary frequency in Hz and enters the rate
    algebra as omega = 2*pi*delta:

        A = gamma_p * sqrt(gamma_G * gamma_g) / (S * sqrt(S^2 + omega^2)),
        S = gamma_p + gamma1 + gamma_G

    The oscillation lags the drive phase phi by arctan(omega / S) and is
    inverted (more relaxation, less |0> population). A negative delta is
    reported at |delta| with the drive phase negated, since
    cos(-2*pi*|delta|*t + phi) = cos(2*pi*|delta|*t - phi).

    Args:
        gamma_p: Polarization rate
        gamma1: Intrinsic relaxation rate
        gamma_big_g: Reference-induced relaxation rate
        gamma_g: Signal-induced relaxation rate
        delta: Beat frequency in Hz
        phi: Relative phase of the reference tone, rad

    Returns:
        HeterodyneResponse with amplitude (probability), frequency (Hz) and phase (rad)

    Raises:
        ValueError: On negative rates, or gamma_g > 0 without a reference tone
    """
    _check_rates(gamma_p=gamma_p, gamma1=gamma1, gamma_big_g=gamma_big_g, gamma_g=gamma_g)
    if gamma_big_g == 0 and gamma_g > 0:
        raise ValueError("gamma_big_g must be > 0 when gamma_g > 0: no reference tone to interfere with")
    if gamma_g > WEAK_SIGNAL_RATIO * gamma_big_g:
        logger.warning(
            f"Signal outside perturbative regime | gamma_g={gamma_g:.4g} | "
            f"gamma_big_g={gamma_big_g:.4g} | ratio={gamma_g / gamma_big_g:.3g}"
        )
    total = gamma_p + gamma1 + gamma_big_g
    omega = TWO_PI * abs(delta)
    amplitude = gamma_p * math.sqrt(gamma_big_g * gamma_g) / (total * math.hypot(total, omega))
    drive_phase = phi if delta >= 0 else -phi
    phase = (drive_phase + math.pi - math.atan2(omega, total)) % TWO_PI
    return HeterodyneResponse(amplitude=amplitude, frequency=abs(delta), phase=phase)


def heterodyne_amplitude(gamma_p, gamma1, gamma_big_g, gamma_g, delta):
    """Vectorized amplitude of :func:`heterodyne_response` without the regime checks."""
    total = np.asarray(gamma_p, dtype=float) + gamma1 + gamma_big_g
    omega = TWO_PI * np.abs(np.asarray(delta, dtype=float))
    amplitude = gamma_p * np.sqrt(np.asarray(gamma_big_g, dtype=float) * gamma_g) / (total * np.hypot(total, omega))
    return float(amplitude) if np.ndim(amplitude) == 0 else amplitude


def bandwidth_3db(gamma_p: float, gamma1: float, gamma_big_g: float, angular: bool = False) -> float:
    """
    Beat frequency at which the heterodyne amplitude falls to half its delta=0 value.

    Returns sqrt(3) * (gamma_p + gamma1 + gamma_G) / (2*pi) in Hz, or the
    angular value sqrt(3) * (gamma_p + gamma1 + gamma_G) when ``angular`` is set.
    """
    _check_rates(gamma_p=gamma_p, gamma1=gamma1, gamma_big_g=gamma_big_g)
    omega_3db = SQRT3 * (gamma_p + gamma1 + gamma_big_g)
    return omega_3db if angular else omega_3db / TWO_PI


def direct_detection_contrast(gamma_p: float, gamma1: float, gamma_g: float) -> float:
    """Population drop P0(microwave off) - P0(microwave on); quadratic in the field."""
    return equilibrium_population(gamma_p, gamma1, 0.0) - equilibrium_population(gamma_p, gamma1, gamma_g)
